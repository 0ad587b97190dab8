"""Bundled example environments."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .core import Pomdp
from .envfile import parse_env
from .errors import InputError

NAMES = ("mu", "mu-prime", "mu-double-prime", "mu-star")


def corpus_path(name: str) -> Path:
    """Filesystem path of a bundled environment file."""
    if name not in NAMES:
        raise InputError(f"unknown corpus environment {name!r} (have {', '.join(NAMES)})")
    with resources.as_file(
        resources.files("cfpomdp").joinpath(f"corpus/{name}.env")
    ) as path:
        return Path(path)


def load_corpus(name: str) -> Pomdp:
    return parse_env(corpus_path(name).read_text())
