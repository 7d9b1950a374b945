"""Bundled guest programs (``*.gp``) with rr:1 golden traces (``*.golden``)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from funcobj.ir import ProgramDef
from funcobj.parse import parse_program


def directory() -> Path:
    return Path(str(resources.files(__name__)))


def names() -> list[str]:
    return sorted(p.stem for p in directory().glob("*.gp"))


def path(name: str) -> Path:
    return directory() / f"{name}.gp"


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str) -> ProgramDef:
    return parse_program(source(name))
