import os

ENV_VAR = "HASSE_FORGE_BUDGET"


def search_budget(requested: int) -> int:
    """Return ``requested`` capped by the ``HASSE_FORGE_BUDGET`` environment variable."""
    raw = os.environ.get(ENV_VAR)
    if not raw:
        return requested
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if cap <= 0:
        raise ValueError(f"{ENV_VAR} must be positive, got {cap}")
    return min(requested, cap)
