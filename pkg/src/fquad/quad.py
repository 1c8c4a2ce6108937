"""Quadratic spaces over GF(2), isometries, Arf invariant and Witt extension."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

from .gf2 import (BitMat, Subspace, bits_of, bitstring, inverse, pack_columns,
                  parity, parse_bitstring)


# above this dimension q and B are evaluated directly instead of tabulated
_TABLE_DIM = 10


@dataclass(frozen=True)
class QuadSpace:
    """GF(2)^dim with a quadratic form.

    ``q_basis`` holds the values of q on the standard basis (bit i is q(e_i)),
    ``bform`` the rows of the Gram matrix of the polar form. The polar form is
    symmetric with zero diagonal, and q(x) = sum x_i q(e_i) + sum_{i<j} x_i x_j B_ij.
    ``spec`` is a display name and takes no part in equality.
    """

    dim: int
    q_basis: int
    bform: tuple[int, ...]
    spec: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.dim
        if n < 0 or len(self.bform) != n or self.q_basis >> n:
            raise ValueError("malformed quadratic space")
        for i, row in enumerate(self.bform):
            if row >> n or (row >> i) & 1:
                raise ValueError("polar form must have zero diagonal")
            for j in bits_of(row):
                if not (self.bform[j] >> i) & 1:
                    raise ValueError("polar form must be symmetric")

    @cached_property
    def btab(self) -> tuple[int, ...]:
        """``btab[y]`` is the vector B(., y), so B(x, y) = parity(x & btab[y])."""
        out = [0] * (1 << self.dim)
        for y in range(1, 1 << self.dim):
            low = y & -y
            out[y] = out[y ^ low] ^ self.bform[low.bit_length() - 1]
        return tuple(out)

    @cached_property
    def qtab(self) -> tuple[int, ...]:
        out = [0] * (1 << self.dim)
        for x in range(1, 1 << self.dim):
            low = x & -x
            rest = x ^ low
            i = low.bit_length() - 1
            out[x] = out[rest] ^ ((self.q_basis >> i) & 1) ^ parity(rest & self.bform[i])
        return tuple(out)

    def q(self, v: int) -> int:
        if self.dim <= _TABLE_DIM:
            return self.qtab[v]
        out = parity(v & self.q_basis)
        for i in bits_of(v):
            out ^= parity(v & self.bform[i] & ~((2 << i) - 1))
        return out

    def b(self, v: int, w: int) -> int:
        if self.dim <= _TABLE_DIM:
            return parity(v & self.btab[w])
        out = 0
        for i in bits_of(v):
            out ^= parity(w & self.bform[i])
        return out

    @property
    def name(self) -> str:
        return self.spec if self.spec is not None else describe(self)

    def __repr__(self):
        return f"QuadSpace({self.name})"

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "q_basis": bitstring(self.q_basis, self.dim),
            "bform": [bitstring(r, self.dim) for r in self.bform],
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> QuadSpace:
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["dim"])
        rows = obj["bform"]
        if len(obj["q_basis"]) != n or len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError("bit string length does not match dim")
        return cls(n, parse_bitstring(obj["q_basis"]), tuple(parse_bitstring(r) for r in rows))


def describe(s: QuadSpace) -> str:
    """Short invariant description, e.g. ``dim4/arf0`` or ``dim3/rad1``."""
    r = radical(s).dim
    if r == 0:
        return f"dim{s.dim}/arf{arf(s)}"
    return f"dim{s.dim}/rad{r}"


def q_eval(s: QuadSpace, v: int) -> int:
    return s.q(v)


def bilinear(s: QuadSpace, v: int, w: int) -> int:
    return s.b(v, w)


def gram(s: QuadSpace) -> BitMat:
    return BitMat(s.dim, s.dim, s.bform)


def radical(s: QuadSpace) -> Subspace:
    """Radical of the polar form."""
    from .gf2 import kernel
    return kernel(gram(s))


def is_nondegenerate(s: QuadSpace) -> bool:
    return radical(s).dim == 0


def orthogonal_sum(*spaces: QuadSpace) -> QuadSpace:
    n = 0
    q = 0
    rows: list[int] = []
    for s in spaces:
        q |= s.q_basis << n
        rows.extend(r << n for r in s.bform)
        n += s.dim
    names = [s.spec for s in spaces]
    spec = None
    if all(x is not None for x in names):
        parts = [x for x in names if x != "0"]
        spec = "+".join(parts) if parts else "0"
    return QuadSpace(n, q, tuple(rows), spec)


def restrict(s: QuadSpace, sub: Subspace) -> QuadSpace:
    """The form restricted to ``sub``, in coordinates of its echelon basis."""
    basis = sub.basis
    q = sum(s.q(v) << i for i, v in enumerate(basis))
    rows = tuple(sum(s.b(v, w) << j for j, w in enumerate(basis)) for v in basis)
    return QuadSpace(len(basis), q, rows)


_ATOMS = {
    "0": (0, 0, ()),
    "H0": (2, 0b00, (0b10, 0b01)),
    "H1": (2, 0b11, (0b10, 0b01)),
    "x0": (1, 0, (0,)),
    "x1": (1, 1, (0,)),
}
_TERM = re.compile(r"^(H0|H1|x0|x1|0)(?:\^(\d+))?$")


@lru_cache(maxsize=None)
def parse_space(spec: str) -> QuadSpace:
    """Build a space from names such as ``H0``, ``H0+H1``, ``H0^2+x1`` or ``0``."""
    text = spec.replace(" ", "").replace("⊥", "+")
    if not text:
        raise ValueError("empty space spec")
    parts = []
    for term in text.split("+"):
        m = _TERM.match(term)
        if not m:
            raise ValueError(f"unknown space term {term!r} in {spec!r}")
        k = int(m.group(2) or 1)
        parts.extend([m.group(1)] * k)
    atoms = [QuadSpace(*_ATOMS[p], spec=p) for p in parts]
    return orthogonal_sum(*atoms)


def hyperbolic(eps: int) -> QuadSpace:
    return parse_space(f"H{eps}")


def load_space(text: str) -> QuadSpace:
    """A space spec, a JSON object, or ``@path`` to a JSON file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return QuadSpace.from_json(json.load(fh))
    if text.lstrip().startswith("{"):
        return QuadSpace.from_json(text)
    return parse_space(text)


def symplectic_basis(s: QuadSpace) -> list[tuple[int, int]]:
    """Pairs (a_i, b_i) with B(a_i, b_i) = 1 and the pairs mutually orthogonal."""
    if not is_nondegenerate(s):
        raise ValueError("symplectic basis needs a nondegenerate space")
    rest = [1 << i for i in range(s.dim)]
    pairs = []
    while rest:
        a = rest.pop(0)
        k = next(i for i, v in enumerate(rest) if s.b(a, v))
        b = rest.pop(k)
        rest = [v ^ (s.b(v, b) and a) ^ (s.b(v, a) and b) for v in rest]
        pairs.append((a, b))
    return pairs


def arf(s: QuadSpace) -> int:
    return sum(s.q(a) & s.q(b) for a, b in symplectic_basis(s)) & 1


@dataclass(frozen=True)
class Isometry:
    """Injective linear map preserving q."""

    source: QuadSpace
    target: QuadSpace
    map: BitMat

    def __post_init__(self):
        if (self.map.rows, self.map.cols) != (self.target.dim, self.source.dim):
            raise ValueError("map shape does not match spaces")
        if Subspace.span(self.target.dim, self.map.columns).dim != self.source.dim:
            raise ValueError("map is not injective")
        cols = self.map.columns
        for i in range(self.source.dim):
            if self.target.q(cols[i]) != (self.source.q_basis >> i) & 1:
                raise ValueError("map does not preserve q")
            for j in range(i):
                if self.target.b(cols[i], cols[j]) != (self.source.bform[i] >> j) & 1:
                    raise ValueError("map does not preserve q")

    @property
    def cols(self) -> tuple[int, ...]:
        return self.map.columns

    def __call__(self, v: int) -> int:
        return self.map.apply(v)

    def image(self) -> Subspace:
        return Subspace.span(self.target.dim, self.map.columns)

    def then(self, other: Isometry) -> Isometry:
        return Isometry(self.source, other.target, other.map @ self.map)


def _extend(source: QuadSpace, target: QuadSpace, fixed: Sequence[int],
            order: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Backtracking over images of basis vectors ``order`` of ``source``.

    ``fixed`` are images already chosen for the first ``len(fixed)`` entries of
    ``order``; candidates must match q, pair correctly with earlier images and
    keep the images independent.
    """
    n = source.dim
    basis = list(order) if order is not None else [1 << i for i in range(n)]
    imgs = list(fixed)
    span = Subspace.span(target.dim, imgs)
    if span.dim != len(imgs):
        return
    qt, bt = target.qtab, target.btab

    def rec(k: int, span: Subspace):
        if k == n:
            yield tuple(imgs)
            return
        e = basis[k]
        qe = source.q(e)
        want = [source.b(e, basis[j]) for j in range(k)]
        for u in range(1, 1 << target.dim):
            if qt[u] != qe:
                continue
            if any(parity(u & bt[imgs[j]]) != want[j] for j in range(k)):
                continue
            if span.contains(u):
                continue
            imgs.append(u)
            yield from rec(k + 1, Subspace.span(target.dim, span.basis + (u,)))
            imgs.pop()

    yield from rec(len(imgs), span)


def isometric_embeddings(d: QuadSpace, w: QuadSpace) -> list[Isometry]:
    """All isometric embeddings ``d -> w``, ordered by packed image columns."""
    cols = sorted(_extend(d, w, ()), key=lambda c: pack_columns(c, w.dim))
    return [Isometry(d, w, BitMat.from_columns(c, w.dim)) for c in cols]


def count_embeddings(d: QuadSpace, w: QuadSpace) -> int:
    return sum(1 for _ in _extend(d, w, ()))


def orthogonal_group_order(s: QuadSpace) -> int:
    return count_embeddings(s, s)


def is_isometric(s1: QuadSpace, s2: QuadSpace) -> Isometry | None:
    """An isometry ``s1 -> s2`` if one exists."""
    if s1.dim != s2.dim:
        return None
    found = next(_extend(s1, s2, ()), None)
    if found is None:
        return None
    return Isometry(s1, s2, BitMat.from_columns(found, s2.dim))


def witt_extend(ambient: QuadSpace, d: Subspace, d2: Subspace, f_bar: BitMat) -> Isometry:
    """Extend an isometry ``d -> d2`` to an isometry of the nondegenerate ambient space.

    ``f_bar`` has one column per basis vector of ``d``, giving its image in
    ambient coordinates.
    """
    if not is_nondegenerate(ambient):
        raise ValueError("ambient space must be nondegenerate")
    n = ambient.dim
    if f_bar.rows != n or f_bar.cols != d.dim:
        raise ValueError("f_bar must have one column per basis vector of d")
    imgs = f_bar.columns
    if Subspace.span(n, imgs) != d2 or d2.dim != d.dim:
        raise ValueError("f_bar must map d bijectively onto d2")
    for i, v in enumerate(d.basis):
        if ambient.q(imgs[i]) != ambient.q(v):
            raise ValueError("f_bar does not preserve q")
        for j in range(i):
            if ambient.b(imgs[i], imgs[j]) != ambient.b(v, d.basis[j]):
                raise ValueError("f_bar does not preserve q")
    order = list(d.basis) + list(d.complement_basis())
    found = next(_extend(ambient, ambient, imgs, order), None)
    if found is None:
        raise ArithmeticError("no extension found")
    # found[k] is the image of order[k]; convert to the standard basis
    change = BitMat.from_columns(order, n)
    m = BitMat.from_columns(found, n) @ inverse(change)
    return Isometry(ambient, ambient, m)
