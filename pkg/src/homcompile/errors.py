"""Exception types shared across the package.

The CLI maps these onto its exit codes (format 2, resource 3, consistency 4).
"""
import os


class FormatError(ValueError):
    """A text artifact (graph, decomposition, circuit) failed to parse."""


class StructureError(ValueError):
    """A certificate is structurally malformed (not a tree, bad labeling)."""


class DisconnectedPatternError(ValueError):
    """An operation that needs a connected pattern got a disconnected one."""


class ResourceError(RuntimeError):
    """An expansion or enumeration guard was exceeded."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed (e.g. an inexact division)."""


DEFAULT_EXPAND_GUARD = 10**6
DEFAULT_ENUM_BUDGET = 10**7
GUARD_ENV = "HOMCOMPILE_GUARD"


def guard_value(default):
    """Return the guard from ``HOMCOMPILE_GUARD`` if set, else ``default``."""
    raw = os.environ.get(GUARD_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{GUARD_ENV} must be an integer, got {raw!r}") from None
