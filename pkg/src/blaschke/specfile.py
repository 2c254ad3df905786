"""Reading and writing Blaschke product spec files.

A spec file is a TOML document with three keys::

    name = "R1"                      # optional
    lambda = [1.0, 0.0]              # [re, im], unimodular
    zeros = [[0.5, 0.0], [0.0, -0.25]]

Numbers may be integers or floats. ``#`` starts a comment.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import FiniteBlaschkeProduct, make_blaschke
from .errors import DomainError

_KEYS = {"name", "lambda", "zeros"}


class SpecFileError(DomainError):
    """A spec file is unreadable, malformed, or describes an invalid product."""


@dataclass(frozen=True)
class BlaschkeSpec:
    product: FiniteBlaschkeProduct
    name: Optional[str] = None


def _pair(value, where: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise SpecFileError(f"{where} must be a [re, im] pair of numbers, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def parse_spec(text: str) -> BlaschkeSpec:
    """Parse spec-file text, raising :class:`SpecFileError` on any violation."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecFileError(f"malformed spec file: {exc}") from None
    unknown = set(doc) - _KEYS
    if unknown:
        raise SpecFileError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("lambda", "zeros"):
        if key not in doc:
            raise SpecFileError(f"missing required key '{key}'")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise SpecFileError("name must be a string")
    lam = _pair(doc["lambda"], "lambda")
    zeros = doc["zeros"]
    if not isinstance(zeros, list) or not zeros:
        raise SpecFileError("zeros must be a non-empty list of [re, im] pairs")
    zs = [_pair(z, f"zeros[{k}]") for k, z in enumerate(zeros)]
    try:
        B = make_blaschke(lam, zs)
    except DomainError as exc:
        raise SpecFileError(str(exc)) from None
    return BlaschkeSpec(B, name)


def load_spec(path: Union[str, Path]) -> BlaschkeSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc}") from None
    return parse_spec(text)


def format_spec(B: FiniteBlaschkeProduct, name: Optional[str] = None) -> str:
    """Spec-file text for ``B``; floats are written with full precision."""
    lines = []
    if name is not None:
        lines.append(f'name = "{name}"')
    lines.append(f"lambda = [{B.lam.real!r}, {B.lam.imag!r}]")
    pairs = ", ".join(f"[{z.real!r}, {z.imag!r}]" for z in B.zeros)
    lines.append(f"zeros = [{pairs}]")
    return "\n".join(lines) + "\n"
