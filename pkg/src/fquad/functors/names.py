"""Textual functor names as used on the command line."""
from __future__ import annotations

import re

from ..quad import parse_space
from .base import ComputableFunctor
from .delta import delta
from .library import (ExteriorPower, NaturalOrbitFunctor, OrbitFunctor, VectProjective,
                      constant, direct_sum, iota_lift, iso_nondeg, iso_point, layer_summand,
                      mix, projective, projective_layer, tensor)

_CACHE: dict[str, ComputableFunctor] = {}


def _split_args(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            raise ValueError("unbalanced parentheses")
        cur += ch
    if depth:
        raise ValueError("unbalanced parentheses")
    out.append(cur)
    return [s.strip() for s in out]


def _build(name: str) -> ComputableFunctor:
    if name == "const":
        return constant()
    m = re.fullmatch(r"Mix([01])1?", name)
    if m:
        return mix(int(m.group(1)))
    m = re.fullmatch(r"P:([^:]+)(?::(sub|layer)(\d+)|:(top))?(?::([ABCEFG]))?", name)
    if m:
        v = parse_space(m.group(1))
        if m.group(5):
            if m.group(2) != "layer" or m.group(3) != "1" or v.dim != 2:
                raise ValueError("kernel types apply to the rank-one layer of a plane")
            return layer_summand(int(m.group(1)[1]), m.group(5))
        if m.group(4):
            return projective_layer(v, v.dim, "quotient_top")
        if m.group(2):
            return projective_layer(v, int(m.group(3)), m.group(2))
        return projective(v)
    m = re.fullmatch(r"iso:(x[01])", name)
    if m:
        return iso_point(int(m.group(1)[1]))
    m = re.fullmatch(r"iso:(.+)", name)
    if m:
        return iso_nondeg(parse_space(m.group(1)))
    m = re.fullmatch(r"R:(.+)", name)
    if m:
        return OrbitFunctor(parse_space(m.group(1)))
    m = re.fullmatch(r"S:(.+)", name)
    if m:
        return NaturalOrbitFunctor(parse_space(m.group(1)))
    m = re.fullmatch(r"iota:Lambda(\d+)", name)
    if m:
        return iota_lift(ExteriorPower(int(m.group(1))))
    m = re.fullmatch(r"iota:PF(\d+)", name)
    if m:
        return iota_lift(VectProjective(int(m.group(1))))
    m = re.fullmatch(r"Delta([01])\((.*)\)", name)
    if m:
        return delta(int(m.group(1)), functor_by_name(m.group(2)))
    m = re.fullmatch(r"(tensor|sum)\((.*)\)", name)
    if m:
        args = [functor_by_name(a) for a in _split_args(m.group(2))]
        if m.group(1) == "tensor":
            if len(args) != 2:
                raise ValueError("tensor takes two functors")
            return tensor(*args)
        return direct_sum(*args)
    raise ValueError(f"unknown functor {name!r}")


def functor_by_name(name: str) -> ComputableFunctor:
    """Shared instance for a name, so caches are reused."""
    key = name.replace(" ", "")
    f = _CACHE.get(key)
    if f is None:
        f = _build(key)
        _CACHE[key] = f
    return f


SHIPPED = [
    "const", "iota:Lambda1", "iota:Lambda2", "iota:PF2", "Mix01", "Mix11",
    "iso:H0", "iso:H1", "iso:x0", "iso:x1", "R:H0", "R:H1", "S:H1",
    "P:H0", "P:H1", "P:H0:sub0", "P:H0:layer1", "P:H0:top", "P:H1:layer1", "P:H1:top",
    "P:H0:layer1:A", "P:H0:layer1:B", "P:H0:layer1:C",
    "tensor(iota:Lambda1,iso:x0)", "sum(Mix01,iso:x1)",
]


def shipped_functors() -> list[ComputableFunctor]:
    return [functor_by_name(n) for n in SHIPPED]
