"""Command-line entry point: the full pipeline without the UI.

Exit codes: 0 success, 1 validation error, 2 I/O error. Every subcommand that
takes --seed is reproducible: identical invocations write identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import UqcureError
from .regions import ExtractionConfig, ensemble_entropy, extract_regions, rank_volumes, save_region_set
from .session import load_journal, replay_journal, save_journal
from .synth import (
    GUIDED,
    UNGUIDED,
    CuratorParams,
    make_dataset,
    save_dataset,
    simulate_curator,
)
from .topology import betti_numbers, local_topology
from .volume import Volume, load_triplet, read_volume, write_volume

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

PORT_ENV = "UQCURE_PORT"


class CliError(UqcureError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we want exit 1
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uqcure", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract ranked uncertainty regions from a dataset")
    p.add_argument("--dataset", required=True, help="dataset directory (raw/seg/unc .vqh)")
    p.add_argument("--tau", type=float, default=0.5, help="selection threshold in [0, 1)")
    p.add_argument("--bin", type=float, default=0.1, dest="bin_width", help="bin width in (0, 1]")
    p.add_argument("--min-size", type=int, default=10, help="minimum region voxel count")
    p.add_argument("--connectivity", type=int, default=26, choices=(6, 26))
    p.add_argument("--out", default=None, help="regions file (default <dataset>/regions.vqr)")

    p = sub.add_parser("rank", help="rank datasets by their top region score")
    p.add_argument("--datasets", nargs="+", required=True, help="dataset directories")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--bin", type=float, default=0.1, dest="bin_width")
    p.add_argument("--min-size", type=int, default=10)
    p.add_argument("--connectivity", type=int, default=26, choices=(6, 26))

    p = sub.add_parser("topology", help="report components/loops/cavities of a segmentation")
    p.add_argument("--seg", required=True, help="segmentation header file")
    p.add_argument("--bbox", default=None, help="z0,y0,x0,z1,y1,x1 (inclusive) for a local report")
    p.add_argument("--margin", type=int, default=5, help="bbox dilation for local reports")

    p = sub.add_parser("synth", help="generate a synthetic dataset with injected errors")
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--tubes", type=int, default=8)
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--merges", type=int, default=3)
    p.add_argument("--breaks", type=int, default=3)
    p.add_argument("--coverage", type=float, default=0.95)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub.add_parser("simulate", help="run simulated curators over synthetic datasets")
    p.add_argument("--mode", required=True, choices=(GUIDED, UNGUIDED))
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first seed; runs use seed..seed+runs-1")
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--tubes", type=int, default=8)
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--merges", type=int, default=3)
    p.add_argument("--breaks", type=int, default=3)
    p.add_argument("--coverage", type=float, default=0.95)
    p.add_argument("--p-detect", type=float, default=0.7)
    p.add_argument("--stop-fraction", type=float, default=0.6)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--out", required=True, help="results CSV path")

    p = sub.add_parser("serve", help="start the local curation HTTP service")
    p.add_argument("--data", required=True, help="directory of dataset directories")
    p.add_argument("--port", type=int, default=None, help=f"default ${PORT_ENV} or 8077")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--ui", default=None, help="directory of built UI assets to serve at /ui")

    p = sub.add_parser("export", help="replay a journal over a segmentation and write it")
    p.add_argument("--seg", required=True, help="pristine segmentation header file")
    p.add_argument("--journal", required=True, help="journal file (one op per line)")
    p.add_argument("--out", required=True, help="output header file")

    p = sub.add_parser("entropy", help="ensemble entropy over member segmentations")
    p.add_argument("--out", required=True, help="output uncertainty header file")
    p.add_argument("members", nargs="+", help="member segmentation header files")

    return parser


def _extraction_config(args) -> ExtractionConfig:
    return ExtractionConfig(
        tau=args.tau,
        bin_width=getattr(args, "bin_width", 0.1),
        connectivity=getattr(args, "connectivity", 26),
        min_region_voxels=getattr(args, "min_size", 10),
    )


def _parse_bbox(text: str):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 6:
        raise CliError("bbox must be z0,y0,x0,z1,y1,x1")
    return (tuple(parts[:3]), tuple(parts[3:]))


def cmd_extract(args) -> int:
    cfg = _extraction_config(args)
    triplet = load_triplet(args.dataset)
    region_set = extract_regions(triplet.unc, cfg, dataset_id=triplet.id)
    out = Path(args.out) if args.out else Path(args.dataset) / "regions.vqr"
    save_region_set(region_set, out)
    print(f"{triplet.id}: {len(region_set.regions)} region(s) -> {out}")
    return EXIT_OK


def cmd_rank(args) -> int:
    cfg = _extraction_config(args)
    sets = []
    for d in args.datasets:
        triplet = load_triplet(d)
        sets.append(extract_regions(triplet.unc, cfg, dataset_id=triplet.id))
    for dataset_id in rank_volumes(sets):
        top = next(s.top_score() for s in sets if s.dataset_id == dataset_id)
        print(f"{dataset_id}\t{'' if top is None else f'{top:.6f}'}")
    return EXIT_OK


def cmd_topology(args) -> int:
    seg = read_volume(args.seg)
    if args.bbox:
        report = local_topology(seg, _parse_bbox(args.bbox), margin=args.margin)
    else:
        report = betti_numbers(seg)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_synth(args) -> int:
    dataset = make_dataset(
        size=args.size,
        n_tubes=args.tubes,
        radius=args.radius,
        k_merges=args.merges,
        k_breaks=args.breaks,
        coverage=args.coverage,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    save_dataset(dataset, args.out)
    print(f"wrote dataset with {len(dataset.errors)} injected error(s) to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = CuratorParams(p_detect=args.p_detect, stop_fraction=args.stop_fraction)
    rows = []
    for seed in range(args.seed, args.seed + args.runs):
        dataset = make_dataset(
            size=args.size,
            n_tubes=args.tubes,
            radius=args.radius,
            k_merges=args.merges,
            k_breaks=args.breaks,
            coverage=args.coverage,
            seed=seed,
        )
        regions = None
        if args.mode == GUIDED:
            regions = extract_regions(dataset.unc, ExtractionConfig(tau=args.tau), dataset_id=str(seed))
        result = simulate_curator(args.mode, dataset, regions, params, seed=seed)
        rows.append(result)
    out = Path(args.out)
    lines = ["mode,seed,recall,inspections,corrections"]
    for r in rows:
        lines.append(f"{r.mode},{r.seed},{r.recall:.6f},{r.inspections},{r.corrections}")
    out.write_text("\n".join(lines) + "\n")
    mean_recall = sum(r.recall for r in rows) / len(rows)
    print(f"{args.mode}: mean recall {mean_recall:.3f} over {len(rows)} run(s) -> {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV, "8077"))
    cfg = ExtractionConfig(tau=args.tau)
    serve(args.data, port=port, host=args.host, config=cfg, ui_dir=args.ui)
    return EXIT_OK


def cmd_export(args) -> int:
    seg = read_volume(args.seg)
    journal = load_journal(args.journal)
    replayed = replay_journal(seg.data, journal)
    out = Path(args.out)
    write_volume(Volume.from_array(replayed, spacing=seg.meta.spacing), out)
    save_journal(journal, out.with_name(out.name + ".journal"))
    print(f"exported {out}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    members = [read_volume(p) for p in args.members]
    unc = ensemble_entropy(members)
    write_volume(unc, args.out)
    print(f"wrote entropy map over {len(members)} member(s) to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "extract": cmd_extract,
    "rank": cmd_rank,
    "topology": cmd_topology,
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
    "export": cmd_export,
    "entropy": cmd_entropy,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"uqcure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UqcureError as exc:
        print(f"uqcure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"uqcure: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
