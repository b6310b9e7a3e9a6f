"""uqcure: uncertainty-guided curation engine for large 3D segmentations."""

from .errors import (
    EditError,
    InjectionError,
    TripletValidationError,
    UqcureError,
    VolumeFormatError,
)
from .regions import (
    ExtractionConfig,
    RegionSet,
    UncertaintyRegion,
    ensemble_entropy,
    extract_regions,
    rank_regions,
    rank_volumes,
)
from .session import CurationSession, EditOp, open_session, replay_journal
from .synth import (
    CurationResult,
    CuratorParams,
    ErrorSite,
    SynthDataset,
    evaluate_recall,
    generate_vessels,
    inject_errors,
    make_dataset,
    simulate_curator,
    synth_uncertainty,
)
from .topology import (
    TopologyDiff,
    TopologyReport,
    betti_numbers,
    connected_components,
    local_topology,
    topology_diff,
)
from .volume import (
    DatasetTriplet,
    Volume,
    VolumeMeta,
    load_triplet,
    read_volume,
    validate_triplet,
    write_volume,
)

__version__ = "0.1.0"

__all__ = [
    "CurationResult",
    "CurationSession",
    "CuratorParams",
    "DatasetTriplet",
    "EditError",
    "EditOp",
    "ErrorSite",
    "ExtractionConfig",
    "InjectionError",
    "RegionSet",
    "SynthDataset",
    "TopologyDiff",
    "TopologyReport",
    "TripletValidationError",
    "UncertaintyRegion",
    "UqcureError",
    "Volume",
    "VolumeFormatError",
    "VolumeMeta",
    "betti_numbers",
    "connected_components",
    "ensemble_entropy",
    "evaluate_recall",
    "extract_regions",
    "generate_vessels",
    "inject_errors",
    "load_triplet",
    "local_topology",
    "make_dataset",
    "open_session",
    "rank_regions",
    "rank_volumes",
    "read_volume",
    "replay_journal",
    "simulate_curator",
    "synth_uncertainty",
    "topology_diff",
    "validate_triplet",
    "write_volume",
]
