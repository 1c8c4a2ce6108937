"""Morphisms between quadratic spaces up to equivalence of cospans.

A morphism ``V -> W`` is a cospan ``V -f-> X <-g- W`` of isometric embeddings.
Up to equivalence it is determined by the pair ``(A, K)``: ``A`` is the
linear map ``V -> W`` obtained by following ``f`` with the orthogonal
projection onto ``g(W)``, and ``K = f^{-1}(g(W))``. A pair is realisable iff
``K`` lies in the radical of the defect form ``x -> q_V(x) + q_W(Ax)``.
Composition is ``(A2 A1, K1 ∩ A1^{-1} K2)``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .gf2 import (BitMat, Subspace, all_subspaces, bitstring, intersect, inverse,
                  pack_columns, parse_bitstring, preimage, solve)
from .quad import Isometry, QuadSpace, hyperbolic, load_space, orthogonal_sum


class InvalidMorphism(ValueError):
    pass


@dataclass(frozen=True)
class DefectForm:
    """``delta(x) = q_V(x) + q_W(Ax)`` together with its polar form."""

    source: QuadSpace
    target: QuadSpace
    A: BitMat

    def q(self, x: int) -> int:
        return self.source.q(x) ^ self.target.q(self.A.apply(x))

    def b(self, x: int, y: int) -> int:
        return self.source.b(x, y) ^ self.target.b(self.A.apply(x), self.A.apply(y))

    def in_radical(self, x: int) -> bool:
        if self.q(x):
            return False
        return all(not self.b(x, 1 << j) for j in range(self.source.dim))

    def radical(self) -> Subspace:
        # delta is additive on the radical of its polar form, so this is a subspace
        n = self.source.dim
        return Subspace.span(n, (x for x in range(1, 1 << n) if self.in_radical(x)))


@dataclass(frozen=True)
class TqMorphism:
    source: QuadSpace
    target: QuadSpace
    A: BitMat
    K: Subspace

    @property
    def cols(self) -> tuple[int, ...]:
        return self.A.columns

    @property
    def rank(self) -> int:
        return self.K.dim

    def sort_key(self) -> tuple:
        kidx = _subspace_index(self.source.dim)[self.K]
        return (self.rank, pack_columns(self.cols, self.target.dim), kidx)

    def __matmul__(self, other: TqMorphism) -> TqMorphism:
        return compose(self, other)

    def label(self) -> str:
        n, m = self.source.dim, self.target.dim
        a = ",".join(bitstring(c, m) for c in self.cols) or "-"
        k = ",".join(bitstring(v, n) for v in self.K.basis) or "0"
        return f"r{self.rank}[{a}|{k}]"

    def to_json(self) -> dict:
        return {
            "src": self.source.name,
            "tgt": self.target.name,
            "src_space": self.source.to_json(),
            "tgt_space": self.target.to_json(),
            "A": self.A.to_bitstrings(),
            "K": [bitstring(v, self.source.dim) for v in self.K.basis],
        }

    def __repr__(self):
        return f"TqMorphism({self.source.name}->{self.target.name} {self.label()})"


def morphism_from_json(obj: dict) -> TqMorphism:
    src = QuadSpace.from_json(obj["src_space"]) if "src_space" in obj else load_space(obj["src"])
    tgt = QuadSpace.from_json(obj["tgt_space"]) if "tgt_space" in obj else load_space(obj["tgt"])
    if "src_space" in obj:
        src = _respec(src, obj.get("src"))
        tgt = _respec(tgt, obj.get("tgt"))
    A = BitMat.from_bitstrings(obj["A"], src.dim) if obj["A"] else BitMat.zero(tgt.dim, src.dim)
    if A.rows != tgt.dim:
        raise InvalidMorphism("A has the wrong number of rows")
    K = Subspace.span(src.dim, (parse_bitstring(v) for v in obj["K"]))
    return make_morphism(src, tgt, A, K)


def _respec(s: QuadSpace, name: str | None) -> QuadSpace:
    if name is None:
        return s
    try:
        named = load_space(name)
    except ValueError:
        return s
    return named if named == s else s


def make_morphism(source: QuadSpace, target: QuadSpace, A: BitMat, K: Subspace) -> TqMorphism:
    """Validated constructor."""
    if (A.rows, A.cols) != (target.dim, source.dim):
        raise InvalidMorphism("A does not map source to target")
    if K.ambient_dim != source.dim:
        raise InvalidMorphism("K is not a subspace of the source")
    defect = DefectForm(source, target, A)
    for k in K.basis:
        if not defect.in_radical(k):
            raise InvalidMorphism("K is not contained in the radical of the defect form")
    if Subspace.span(target.dim, (A.apply(k) for k in K.basis)).dim != K.dim:
        raise InvalidMorphism("A is not injective on K")
    return TqMorphism(source, target, A, K)


def t_of(f: BitMat, source: QuadSpace, target: QuadSpace) -> TqMorphism:
    """The rank-0 morphism with linear part ``f``."""
    return make_morphism(source, target, f, Subspace.zero(source.dim))


def idempotent_e(v: QuadSpace) -> TqMorphism:
    """Rank-0 endomorphism with identity linear part."""
    return t_of(BitMat.identity(v.dim), v, v)


def identity(v: QuadSpace) -> TqMorphism:
    return TqMorphism(v, v, BitMat.identity(v.dim), Subspace.full(v.dim))


def embedding_morphism(f: Isometry) -> TqMorphism:
    return TqMorphism(f.source, f.target, f.map, Subspace.full(f.source.dim))


def compose(t2: TqMorphism, t1: TqMorphism) -> TqMorphism:
    """``t2 ∘ t1``."""
    if t1.target != t2.source:
        raise ValueError("morphisms are not composable")
    A = t2.A @ t1.A
    K = intersect(t1.K, preimage(t1.A, t2.K))
    return TqMorphism(t1.source, t2.target, A, K)


def rank(t: TqMorphism) -> int:
    return t.K.dim


def orth_sum_morphism(t1: TqMorphism, t2: TqMorphism) -> TqMorphism:
    src = orthogonal_sum(t1.source, t2.source)
    tgt = orthogonal_sum(t1.target, t2.target)
    n1 = t1.source.dim
    K = Subspace(src.dim, t1.K.basis + tuple(v << n1 for v in t2.K.basis))
    return TqMorphism(src, tgt, t1.A.block_diag(t2.A), K)


# generators out of a hyperbolic plane: basis a = e0, b = e1
_KERNELS = {"A": 0b01, "B": 0b10, "C": 0b11}
_H1_KINDS = {"E": "A", "F": "B", "G": "C"}


def generator(kind: str, v: int, w: int, target: QuadSpace, eps: int = 0) -> TqMorphism:
    """Morphism out of ``H_eps`` sending (a, b) to (v, w).

    ``kind`` is ``t`` (rank 0), ``D`` (rank 2) or a rank-1 type: ``A``/``B``/``C``
    (kernel spanned by a, b, a+b) or their hyperbolic-1 names ``E``/``F``/``G``.
    """
    src = hyperbolic(eps)
    A = BitMat.from_columns((v, w), target.dim)
    k = _H1_KINDS.get(kind, kind)
    if k == "t":
        K = Subspace.zero(2)
    elif k == "D":
        K = Subspace.full(2)
    elif k in _KERNELS:
        K = Subspace.span(2, [_KERNELS[k]])
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return make_morphism(src, target, A, K)


def classify_generator(t: TqMorphism) -> tuple[str, int, int]:
    """(kind, v, w) for a morphism out of a standard hyperbolic plane."""
    if t.source == hyperbolic(0):
        names = {0b01: "A", 0b10: "B", 0b11: "C"}
    elif t.source == hyperbolic(1):
        names = {0b01: "E", 0b10: "F", 0b11: "G"}
    else:
        raise ValueError("source is not a standard hyperbolic plane")
    v, w = t.cols
    if t.rank == 0:
        return "t", v, w
    if t.rank == 2:
        return "D", v, w
    return names[t.K.basis[0]], v, w


# --- batched morphism arrays ---------------------------------------------

def _span_table(cols: np.ndarray, n: int) -> np.ndarray:
    """``out[..., x]`` = image of the vector x under the map with these columns."""
    out = np.zeros(cols.shape[:-1] + (1 << n,), dtype=np.int64)
    for x in range(1, 1 << n):
        low = x & -x
        out[..., x] = out[..., x ^ low] ^ cols[..., low.bit_length() - 1]
    return out


@dataclass
class MorphismBatch:
    """Arrays for ``N`` morphisms with common source and target.

    ``cols[t, i]`` is A e_i, ``img[t, x]`` is A x and ``kin[t, x]`` says whether
    x lies in K.
    """

    source: QuadSpace
    target: QuadSpace
    cols: np.ndarray
    img: np.ndarray
    kin: np.ndarray

    def __len__(self) -> int:
        return self.cols.shape[0]

    @classmethod
    def from_morphisms(cls, ts: Sequence[TqMorphism]) -> MorphismBatch:
        src, tgt = ts[0].source, ts[0].target
        n = src.dim
        cols = np.array([t.cols for t in ts], dtype=np.int64).reshape(len(ts), n)
        kin = np.zeros((len(ts), 1 << n), dtype=bool)
        for r, t in enumerate(ts):
            if t.source != src or t.target != tgt:
                raise ValueError("batch morphisms must share source and target")
            kin[r, list(t.K.elements)] = True
        return cls(src, tgt, cols, _span_table(cols, n), kin)

    def slice(self, start: int, stop: int) -> MorphismBatch:
        return MorphismBatch(self.source, self.target, self.cols[start:stop],
                             self.img[start:stop], self.kin[start:stop])

    def take(self, rows) -> MorphismBatch:
        return MorphismBatch(self.source, self.target, self.cols[rows], self.img[rows], self.kin[rows])

    def chunks(self, size: int) -> Iterator[tuple[int, MorphismBatch]]:
        size = max(1, size)
        for start in range(0, len(self), size):
            yield start, self.slice(start, start + size)

    def morphism(self, r: int) -> TqMorphism:
        n = self.source.dim
        A = BitMat.from_columns([int(c) for c in self.cols[r]], self.target.dim)
        K = Subspace.span(n, (x for x in np.flatnonzero(self.kin[r]).tolist()))
        return TqMorphism(self.source, self.target, A, K)

    def __iter__(self) -> Iterator[TqMorphism]:
        for r in range(len(self)):
            yield self.morphism(r)


def compose_batch(b2: MorphismBatch, b1: MorphismBatch) -> MorphismBatch:
    """Row-wise ``b2[t] ∘ b1[t]``."""
    if b1.target != b2.source or len(b1) != len(b2):
        raise ValueError("batches are not composable row by row")
    rows = np.arange(len(b1))[:, None]
    cols = b2.img[rows, b1.cols]
    img = b2.img[rows, b1.img]
    kin = b1.kin & b2.kin[rows, b1.img]
    return MorphismBatch(b1.source, b2.target, cols, img, kin)


@dataclass(frozen=True)
class _SubspaceIndex:
    subs: tuple[Subspace, ...]
    index: dict
    masks: np.ndarray         # membership mask of each subspace (uint64)
    member: np.ndarray        # (S, 2^n) bool
    dims: np.ndarray
    by_mask: dict

    def __getitem__(self, s: Subspace) -> int:
        return self.index[s]

    def lookup_masks(self, masks: np.ndarray) -> np.ndarray:
        order = np.argsort(self.masks)
        sm = self.masks[order]
        pos = np.searchsorted(sm, masks)
        pos = np.minimum(pos, len(sm) - 1)
        if np.any(sm[pos] != masks):
            raise ArithmeticError("mask is not a subspace")
        return order[pos]


_SUBIDX: dict[int, _SubspaceIndex] = {}


def _subspace_index(n: int) -> _SubspaceIndex:
    if n > 6:
        raise ValueError("subspace tables are limited to dimension 6")
    si = _SUBIDX.get(n)
    if si is None:
        subs = all_subspaces(n)
        member = np.zeros((len(subs), 1 << n), dtype=bool)
        for k, s in enumerate(subs):
            member[k, list(s.elements)] = True
        masks = np.array([s.mask for s in subs], dtype=np.uint64)
        si = _SubspaceIndex(subs, {s: k for k, s in enumerate(subs)}, masks, member,
                            np.array([s.dim for s in subs]), {int(m): k for k, m in enumerate(masks)})
        _SUBIDX[n] = si
    return si


def bool_to_mask(kin: np.ndarray) -> np.ndarray:
    """Pack the last axis (at most 64 entries) of a bool array into uint64."""
    w = kin.shape[-1]
    weights = (np.uint64(1) << np.arange(w, dtype=np.uint64))
    return (kin.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def _parity64(x: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(x) & 1).astype(np.int64)


class HomSet(MorphismBatch):
    """Every morphism ``source -> target``, sorted by (rank, packed A, K index)."""

    def __init__(self, source: QuadSpace, target: QuadSpace, max_rank: int | None = None):
        n, m = source.dim, target.dim
        if n * m > 24 or n > 6:
            raise ValueError(f"hom set {source.name} -> {target.name} is too large to enumerate")
        si = _subspace_index(n)
        akeys = np.arange(1 << (n * m), dtype=np.int64)
        cols = (akeys[:, None] >> (m * np.arange(n))) & ((1 << m) - 1)
        img = _span_table(cols, n)
        qv = np.array(source.qtab, dtype=np.int64)
        qw = np.array(target.qtab, dtype=np.int64)
        bw = np.array(target.btab, dtype=np.int64)
        ok = (qv[None, :] ^ qw[img]) == 0
        xs = np.arange(1 << n, dtype=np.int64)
        for j in range(n):
            bv = _parity64((xs & source.btab[1 << j]).astype(np.uint64))
            bimg = _parity64((img & bw[cols[:, j]][:, None]).astype(np.uint64))
            ok &= (bv[None, :] ^ bimg) == 0
        rmask = bool_to_mask(ok)
        valid = (si.masks[None, :] & ~rmask[:, None]) == 0
        if max_rank is not None:
            valid &= si.dims[None, :] <= max_rank
        ai, ki = np.nonzero(valid)
        rk = si.dims[ki]
        order = np.lexsort((ki, ai, rk))
        ai, ki, rk = ai[order], ki[order], rk[order]
        super().__init__(source, target, cols[ai], img[ai], si.member[ki])
        self.akey = ai
        self.kidx = ki
        self.rank = rk
        self.nsub = len(si.subs)
        self.codes = ai * self.nsub + ki
        self._code_order = np.argsort(self.codes)
        self._sorted_codes = self.codes[self._code_order]

    def find(self, codes: np.ndarray) -> np.ndarray:
        """Row index for each code ``akey * nsub + kidx``; -1 if absent."""
        pos = np.searchsorted(self._sorted_codes, codes)
        pos = np.minimum(pos, len(self._sorted_codes) - 1)
        hit = self._sorted_codes[pos] == codes
        return np.where(hit, self._code_order[pos], -1)

    def index_of(self, t: TqMorphism) -> int:
        if t.source != self.source or t.target != self.target:
            raise ValueError("morphism does not belong to this hom set")
        code = pack_columns(t.cols, self.target.dim) * self.nsub + _subspace_index(self.source.dim)[t.K]
        r = int(self.find(np.array([code]))[0])
        if r < 0:
            raise ValueError("morphism not found")
        return r

    def rank_counts(self) -> list[int]:
        return np.bincount(self.rank, minlength=self.source.dim + 1).tolist()


_HOM_CACHE: dict = {}
_HOM_LOCK = threading.Lock()


def hom_set(source: QuadSpace, target: QuadSpace) -> HomSet:
    key = (source, target)
    with _HOM_LOCK:
        hs = _HOM_CACHE.get(key)
        if hs is None:
            hs = HomSet(source, target)
            _HOM_CACHE[key] = hs
    return hs


def enumerate_hom(v: QuadSpace, w: QuadSpace, max_rank: int | None = None) -> Iterator[TqMorphism]:
    hs = hom_set(v, w)
    for r in range(len(hs)):
        if max_rank is not None and hs.rank[r] > max_rank:
            break
        yield hs.morphism(r)


# --- explicit cospans ------------------------------------------------------

def realize(t: TqMorphism) -> tuple[Isometry, Isometry]:
    """A cospan ``V -> W ⊥ L <- W`` representing ``t``.

    ``L`` doubles ``V/K`` with the defect form so that it is nondegenerate.
    """
    V, W = t.source, t.target
    defect = DefectForm(V, W, t.A)
    comp = [c for c in t.K.complement_basis()]
    r = len(comp)
    qbits = sum(defect.q(c) << i for i, c in enumerate(comp))
    rows = []
    for i, c in enumerate(comp):
        row = sum(defect.b(c, d) << j for j, d in enumerate(comp))
        rows.append(row | (1 << (r + i)))
    for i in range(r):
        rows.append(1 << i)
    L = QuadSpace(2 * r, qbits, tuple(rows))
    X = orthogonal_sum(W, L)
    m = W.dim
    # coordinates of v in the basis K.basis + comp, keep the comp part
    change = inverse(BitMat.from_columns(list(t.K.basis) + comp, V.dim))
    cols = []
    for i in range(V.dim):
        coeff = change.apply(1 << i) >> t.K.dim
        cols.append(t.A.columns[i] | (coeff << m))
    phi = Isometry(V, X, BitMat.from_columns(cols, X.dim))
    incl = Isometry(W, X, BitMat.from_columns([1 << i for i in range(m)], X.dim))
    return phi, incl


def from_diagram(f: Isometry, g: Isometry) -> TqMorphism:
    """Normal form of the cospan ``f.source -f-> X <-g- g.source``."""
    if f.target != g.target:
        raise ValueError("cospan legs must share a target")
    V, W, X = f.source, g.source, f.target
    gw = BitMat(W.dim, W.dim, W.bform)
    gcols = g.cols
    cols = []
    for x in f.cols:
        rhs = sum(X.b(x, gcols[j]) << j for j in range(W.dim))
        w = solve(gw, rhs)
        if w is None:
            raise ValueError("target leg must have nondegenerate source")
        cols.append(w)
    A = BitMat.from_columns(cols, W.dim)
    K = preimage(f.map, g.image())
    return make_morphism(V, W, A, K)


def compose_realized(t2: TqMorphism, t1: TqMorphism) -> TqMorphism:
    """Compose through explicit cospans and reduce back to normal form."""
    phi1, _ = realize(t1)            # V -> W ⊥ L1
    phi2, incl2 = realize(t2)        # W -> Y ⊥ L2
    X1 = phi1.target
    L1dim = X1.dim - t1.target.dim
    L1 = QuadSpace(L1dim, X1.q_basis >> t1.target.dim,
                   tuple(r >> t1.target.dim for r in X1.bform[t1.target.dim:]))
    X = orthogonal_sum(phi2.target, L1)
    mw = t1.target.dim
    shift = phi2.target.dim
    cols = []
    for c in phi1.cols:
        w_part = c & ((1 << mw) - 1)
        l_part = c >> mw
        cols.append(phi2.map.apply(w_part) | (l_part << shift))
    f = Isometry(t1.source, X, BitMat.from_columns(cols, X.dim))
    g = Isometry(t2.target, X, BitMat.from_columns(incl2.cols, X.dim))
    return from_diagram(f, g)

