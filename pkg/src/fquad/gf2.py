"""Linear algebra over GF(2) on bit-packed integers.

A vector of length ``n`` is a Python int whose bit ``i`` is coordinate ``i``.
A matrix stores one int per row; bit ``j`` of row ``i`` is entry ``(i, j)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence


def parity(x: int) -> int:
    return x.bit_count() & 1


def bits_of(x: int) -> Iterator[int]:
    """Indices of the set bits of ``x``, ascending."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def bitstring(x: int, n: int) -> str:
    """Coordinate 0 first."""
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))


def parse_bitstring(s: str) -> int:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return sum(1 << i for i, c in enumerate(s) if c == "1")


@dataclass(frozen=True)
class BitVec:
    length: int
    bits: int

    def __post_init__(self):
        if self.length < 0 or self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits exceed vector length")

    @classmethod
    def from_list(cls, entries: Sequence[int]) -> BitVec:
        return cls(len(entries), sum((e & 1) << i for i, e in enumerate(entries)))

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.length)]

    def __xor__(self, other: BitVec) -> BitVec:
        self._check(other)
        return BitVec(self.length, self.bits ^ other.bits)

    __add__ = __xor__

    def dot(self, other: BitVec) -> int:
        self._check(other)
        return parity(self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def _check(self, other: BitVec):
        if self.length != other.length:
            raise ValueError("length mismatch")

    def __str__(self):
        return bitstring(self.bits, self.length)


@dataclass(frozen=True)
class BitMat:
    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        if len(self.data) != self.rows:
            raise ValueError("row count mismatch")
        limit = 1 << self.cols
        for r in self.data:
            if r < 0 or r >= limit:
                raise ValueError("row exceeds column count")

    @classmethod
    def zero(cls, rows: int, cols: int) -> BitMat:
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> BitMat:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[int], rows: int) -> BitMat:
        data = [0] * rows
        for j, c in enumerate(columns):
            for i in bits_of(c):
                if i >= rows:
                    raise ValueError("column exceeds row count")
                data[i] |= 1 << j
        return cls(rows, len(columns), tuple(data))

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], cols: int | None = None) -> BitMat:
        ncols = cols if cols is not None else (len(entries[0]) if entries else 0)
        return cls(len(entries), ncols, tuple(BitVec.from_list(r).bits for r in entries))

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.data]

    @cached_property
    def columns(self) -> tuple[int, ...]:
        out = [0] * self.cols
        for i, r in enumerate(self.data):
            for j in bits_of(r):
                out[j] |= 1 << i
        return tuple(out)

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> j) & 1

    def apply(self, v: int) -> int:
        """Matrix times column vector."""
        out = 0
        for j in bits_of(v):
            out ^= self.columns[j]
        return out

    def __matmul__(self, other: BitMat) -> BitMat:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        rows = []
        for r in self.data:
            acc = 0
            for j in bits_of(r):
                acc ^= other.data[j]
            rows.append(acc)
        return BitMat(self.rows, other.cols, tuple(rows))

    def __add__(self, other: BitMat) -> BitMat:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return BitMat(self.rows, self.cols, tuple(a ^ b for a, b in zip(self.data, other.data)))

    __xor__ = __add__

    def transpose(self) -> BitMat:
        return BitMat(self.cols, self.rows, self.columns)

    def is_zero(self) -> bool:
        return not any(self.data)

    def rank(self) -> int:
        return rref(self)[1]

    def block_diag(self, other: BitMat) -> BitMat:
        rows = list(self.data) + [r << self.cols for r in other.data]
        return BitMat(self.rows + other.rows, self.cols + other.cols, tuple(rows))

    def hstack(self, other: BitMat) -> BitMat:
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return BitMat(self.rows, self.cols + other.cols,
                      tuple(a | (b << self.cols) for a, b in zip(self.data, other.data)))

    def to_bitstrings(self) -> list[str]:
        return [bitstring(r, self.cols) for r in self.data]

    @classmethod
    def from_bitstrings(cls, rows: Sequence[str], cols: int) -> BitMat:
        data = tuple(parse_bitstring(r) for r in rows)
        if any(len(r) != cols for r in rows):
            raise ValueError("row length mismatch")
        return cls(len(data), cols, data)

    def __str__(self):
        return "\n".join(self.to_bitstrings())


def _echelon(rows: Iterable[int]) -> list[int]:
    """Fully reduced echelon rows sorted by pivot (lowest set bit)."""
    piv: dict[int, int] = {}
    for r in rows:
        while r:
            low = r & -r
            if low in piv:
                r ^= piv[low]
            else:
                piv[low] = r
                break
    # back-substitute in ascending pivot order
    order = sorted(piv)
    for low in order:
        r = piv[low]
        for k in order:
            if k != low and piv[k] & low:
                piv[k] ^= r
    return [piv[k] for k in order]


def rref(m: BitMat) -> tuple[BitMat, int]:
    """Reduced row-echelon form (pivots ascending) and rank; zero rows dropped then padded."""
    ech = _echelon(m.data)
    rank = len(ech)
    return BitMat(m.rows, m.cols, tuple(ech) + (0,) * (m.rows - rank)), rank


@dataclass(frozen=True)
class Subspace:
    """Subspace of GF(2)^ambient_dim, basis kept in reduced echelon form."""

    ambient_dim: int
    basis: tuple[int, ...]

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[int]) -> Subspace:
        vecs = list(vectors)
        if any(v < 0 or v >> ambient_dim for v in vecs):
            raise ValueError("vector outside ambient space")
        return cls(ambient_dim, tuple(_echelon(vecs)))

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        return cls(ambient_dim, tuple(1 << i for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def pivots(self) -> tuple[int, ...]:
        return tuple((b & -b).bit_length() - 1 for b in self.basis)

    def reduce(self, v: int) -> int:
        for b, p in zip(self.basis, self.pivots):
            if (v >> p) & 1:
                v ^= b
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    __contains__ = contains

    def coordinates(self, v: int) -> int:
        """Coefficients of ``v`` in the basis, as a bit-packed int."""
        c = 0
        for k, p in enumerate(self.pivots):
            if (v >> p) & 1:
                c |= 1 << k
        if self.combine(c) != v:
            raise ValueError("vector not in subspace")
        return c

    def combine(self, coeffs: int) -> int:
        out = 0
        for k in bits_of(coeffs):
            out ^= self.basis[k]
        return out

    @cached_property
    def elements(self) -> tuple[int, ...]:
        return tuple(sorted(self.combine(c) for c in range(1 << self.dim)))

    @cached_property
    def mask(self) -> int:
        """Membership bitmask over all 2^ambient_dim vectors."""
        m = 0
        for e in self.elements:
            m |= 1 << e
        return m

    def is_subspace_of(self, other: Subspace) -> bool:
        return all(other.contains(b) for b in self.basis)

    def complement_basis(self) -> tuple[int, ...]:
        """Standard basis vectors completing ``basis`` to a basis of the ambient space."""
        piv = set(self.pivots)
        return tuple(1 << i for i in range(self.ambient_dim) if i not in piv)

    def __and__(self, other: Subspace) -> Subspace:
        return intersect(self, other)

    def __add__(self, other: Subspace) -> Subspace:
        return subspace_sum(self, other)

    def sort_key(self) -> tuple:
        return (self.dim, self.basis)


def kernel(m: BitMat) -> Subspace:
    """Null space ``{v : m v = 0}`` inside GF(2)^cols."""
    ech = _echelon(m.data)
    pivots = [(r & -r).bit_length() - 1 for r in ech]
    pset = set(pivots)
    vecs = []
    for f in range(m.cols):
        if f in pset:
            continue
        v = 1 << f
        for r, p in zip(ech, pivots):
            if (r >> f) & 1:
                v |= 1 << p
        vecs.append(v)
    return Subspace.span(m.cols, vecs)


def image(m: BitMat) -> Subspace:
    return Subspace.span(m.rows, m.columns)


def preimage(m: BitMat, s: Subspace) -> Subspace:
    """``{v : m v in s}``."""
    if s.ambient_dim != m.rows:
        raise ValueError("ambient mismatch")
    # v lies in the preimage iff projecting m v onto the non-pivot coordinates gives zero
    reduced = [s.reduce(c) for c in m.columns]
    return kernel(BitMat.from_columns(reduced, m.rows))


def intersect(s1: Subspace, s2: Subspace) -> Subspace:
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError("ambient mismatch")
    # coefficient vectors c on s1's basis with combine(c) in s2
    inc = BitMat.from_columns(s1.basis, s1.ambient_dim)
    coeffs = preimage(inc, s2)
    return Subspace.span(s1.ambient_dim, (s1.combine(c) for c in coeffs.basis))


def subspace_sum(s1: Subspace, s2: Subspace) -> Subspace:
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError("ambient mismatch")
    return Subspace.span(s1.ambient_dim, s1.basis + s2.basis)


def solve(m: BitMat, b: int) -> int | None:
    """Some ``x`` with ``m x = b``, or None."""
    n = m.cols
    aug = [(r | (((b >> i) & 1) << n)) for i, r in enumerate(m.data)]
    ech = _echelon(aug)
    x = 0
    for r in ech:
        p = (r & -r).bit_length() - 1
        if p == n:
            return None
        if (r >> n) & 1:
            x |= 1 << p
    return x


def inverse(m: BitMat) -> BitMat:
    if m.rows != m.cols:
        raise ValueError("not square")
    n = m.rows
    ech = _echelon(r | (1 << (n + i)) for i, r in enumerate(m.data))
    mask = (1 << n) - 1
    if len(ech) != n or any((r & mask) != (1 << i) for i, r in enumerate(ech)):
        raise ValueError("matrix is singular")
    return BitMat(n, n, tuple(r >> n for r in ech))


def _rref_rows(n: int, pivots: Sequence[int], free: Sequence[int]) -> tuple[int, ...]:
    """Echelon rows for given pivots; ``free`` lists the free bits row by row."""
    rows = []
    it = iter(free)
    for k, p in enumerate(pivots):
        row = 1 << p
        nxt = pivots[k + 1:]
        for c in range(p + 1, n):
            if c in nxt:
                continue
            if next(it):
                row |= 1 << c
        rows.append(row)
    return tuple(rows)


def enumerate_subspaces(n: int, d: int) -> list[Subspace]:
    """All ``d``-dimensional subspaces of GF(2)^n, sorted by echelon basis."""
    if not 0 <= d <= n:
        return []
    out = []
    for pivots in combinations(range(n), d):
        nfree = sum(1 for k, p in enumerate(pivots) for c in range(p + 1, n) if c not in pivots[k + 1:])
        for free in product((0, 1), repeat=nfree):
            out.append(Subspace(n, _rref_rows(n, pivots, free)))
    out.sort(key=Subspace.sort_key)
    return out


@lru_cache(maxsize=None)
def all_subspaces(n: int) -> tuple[Subspace, ...]:
    """Every subspace of GF(2)^n, sorted by (dim, basis)."""
    return tuple(s for d in range(n + 1) for s in enumerate_subspaces(n, d))


def gaussian_binomial(n: int, d: int) -> int:
    if not 0 <= d <= n:
        return 0
    num = den = 1
    for i in range(d):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def pack_columns(columns: Sequence[int], width: int) -> int:
    """Concatenate columns into one int, column 0 in the low bits."""
    key = 0
    for i, c in enumerate(columns):
        key |= c << (width * i)
    return key


def unpack_columns(key: int, count: int, width: int) -> tuple[int, ...]:
    m = (1 << width) - 1
    return tuple((key >> (width * i)) & m for i in range(count))


def enumerate_linear_maps(n_from: int, n_to: int) -> Iterator[BitMat]:
    """All ``n_to x n_from`` matrices, ordered by packed columns."""
    for key in range(1 << (n_from * n_to)):
        yield BitMat.from_columns(unpack_columns(key, n_from, n_to), n_to)


class Eliminator:
    """Incremental row space over GF(2) on arbitrary-width int rows."""

    def __init__(self):
        self.piv: dict[int, int] = {}

    def add(self, r: int) -> bool:
        """Insert ``r``; True if it enlarged the span."""
        while r:
            low = r & -r
            p = self.piv.get(low)
            if p is None:
                self.piv[low] = r
                return True
            r ^= p
        return False

    @property
    def rank(self) -> int:
        return len(self.piv)

    def nullspace(self, nvars: int) -> list[int]:
        """Basis of ``{x : r . x = 0 for every inserted r}``."""
        ech = _echelon(self.piv.values())
        pivots = [(r & -r).bit_length() - 1 for r in ech]
        pset = set(pivots)
        out = []
        for f in range(nvars):
            if f in pset:
                continue
            v = 1 << f
            for r, p in zip(ech, pivots):
                if (r >> f) & 1:
                    v |= 1 << p
            out.append(v)
        return out
