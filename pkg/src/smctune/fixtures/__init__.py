"""Bundled example configurations and a synthetic test ground motion."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

__all__ = ["fixture_path", "list_fixtures"]


def fixture_path(name: str) -> Path | None:
    """Filesystem path of a bundled fixture, or None when absent."""
    candidate = resources.files(__package__).joinpath(name)
    try:
        path = Path(str(candidate))
    except TypeError:  # pragma: no cover - zipped installs are not used here
        return None
    return path if path.is_file() else None


def list_fixtures() -> list[str]:
    root = Path(str(resources.files(__package__)))
    return sorted(p.name for p in root.iterdir()
                  if p.suffix in (".json", ".csv") and p.is_file())
