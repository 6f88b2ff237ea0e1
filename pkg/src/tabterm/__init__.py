"""Tabled logic programs: an evaluation engine and a termination prover."""

from importlib import resources

__version__ = "0.1.0"


def corpus_path(name: str):
    """Path-like handle to a bundled example program or certificate."""
    return resources.files(__name__).joinpath("corpus", name)


def corpus_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


def corpus_names() -> list:
    return sorted(p.name for p in resources.files(__name__).joinpath("corpus").iterdir()
                  if p.name.endswith(".tlp"))
