"""
Run identifiers for lyacert.

Every training run gets a ULID so output directories sort by creation time
and never collide, even for sweeps started within the same millisecond.
"""

from __future__ import annotations

import ulid


def generate_ulid() -> str:
    """
    Generate a 26-character ULID string.

    Uses the monotonic generator of ulid-py when it is available, so ids
    created within one millisecond still sort in creation order.
    """
    monotonic = getattr(ulid, "monotonic", None)
    factory = getattr(monotonic, "new", None) or ulid.new
    return str(factory())


def new_run_id() -> str:
    """Generate a new run identifier."""
    return generate_ulid()


def run_name(algo: str, env: str, seed: int, run_id: str | None = None) -> str:
    """
    Build the default directory name for a run.

    Args:
        algo: Algorithm name
        env: Environment name
        seed: Root seed
        run_id: Optional identifier; a new one is generated when omitted

    Returns:
        str: Name of the form ``<algo>-<env>-seed<seed>-<ulid>``
    """
    return f"{algo}-{env}-seed{seed}-{run_id or new_run_id()}"


__all__ = ["generate_ulid", "new_run_id", "run_name"]
