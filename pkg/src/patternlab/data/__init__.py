"""Bundled example pattern and hypergraph files."""

from importlib import resources
from pathlib import Path

__all__ = ["example_path", "list_examples"]


def example_path(name: str) -> Path:
    """Filesystem path of a bundled example file, e.g. example_path('p_112.json')."""
    path = Path(str(resources.files(__package__) / name))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled example named {name!r}")
    return path


def list_examples() -> list[str]:
    return sorted(
        entry.name
        for entry in resources.files(__package__).iterdir()
        if entry.name.endswith(".json")
    )
