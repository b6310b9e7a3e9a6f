"""Shared exception types.

Everything user-correctable (bad inputs, violated contracts) derives from
UqcureError so the CLI can map it to exit code 1, while genuine I/O failures
stay OSError (exit code 2).
"""


class UqcureError(Exception):
    """Base class for validation and contract errors."""


class VolumeFormatError(UqcureError):
    """Header or payload of a volume file violates the format contract."""


class TripletValidationError(UqcureError):
    """A (raw, seg, unc) triplet violates one of its invariants."""


class EditError(UqcureError):
    """An edit operation was rejected; session state is unchanged."""


class InjectionError(UqcureError):
    """Could not place the requested number of synthetic error sites."""
