"""Concrete functors: representables and their rank layers, mixed-pair functors,
embedding functors, orbit functors, lifts of vector-space functors, tensor
products and direct sums."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from ..gf2 import BitMat, Subspace, bitstring, pack_columns
from ..quad import QuadSpace, isometric_embeddings, parse_space
from ..tq import MorphismBatch, TqMorphism, _subspace_index, hom_set
from .base import ComputableFunctor


def _searchsorted_exact(sorted_codes: np.ndarray, codes: np.ndarray) -> np.ndarray:
    if sorted_codes.size == 0:
        return np.full(codes.shape, -1, dtype=np.int64)
    pos = np.searchsorted(sorted_codes, codes)
    pos = np.minimum(pos, sorted_codes.size - 1)
    return np.where(sorted_codes[pos] == codes, pos, -1)


def _pack_last(cols: np.ndarray, width: int) -> np.ndarray:
    shifts = width * np.arange(cols.shape[-1], dtype=np.int64)
    return (cols << shifts).sum(axis=-1, dtype=np.int64)


class ProjectiveFunctor(ComputableFunctor):
    """Morphisms out of ``source``, restricted to ranks ``lo..hi``.

    Composites that drop below rank ``lo`` are sent to zero, so ``lo = 0``
    gives subfunctors of the representable and ``lo = hi`` gives the rank
    layers. ``kernel`` keeps only morphisms with that kernel subspace.
    """

    monomial = True

    def __init__(self, source: QuadSpace, lo: int = 0, hi: int | None = None,
                 kernel: Subspace | None = None, name: str | None = None):
        self.source = source
        self.lo = lo
        self.hi = source.dim if hi is None else hi
        self.kernel = kernel
        self._kidx = None if kernel is None else _subspace_index(source.dim)[kernel]
        super().__init__(name or f"P:{source.name}[{lo}..{self.hi}]")

    def rows(self, space: QuadSpace) -> np.ndarray:
        """Rows of the full hom set that form the basis here."""
        def compute():
            hs = hom_set(self.source, space)
            keep = (hs.rank >= self.lo) & (hs.rank <= self.hi)
            if self._kidx is not None:
                keep &= hs.kidx == self._kidx
            return np.flatnonzero(keep)
        return self.cached(("rows", space), compute)

    def positions(self, space: QuadSpace) -> np.ndarray:
        def compute():
            hs = hom_set(self.source, space)
            pos = np.full(len(hs) + 1, -1, dtype=np.int64)
            r = self.rows(space)
            pos[r] = np.arange(r.size)
            return pos
        return self.cached(("pos", space), compute)

    def _dim(self, space):
        return int(self.rows(space).size)

    def _basis(self, space):
        hs = hom_set(self.source, space)
        return [hs.morphism(int(r)) for r in self.rows(space)]

    def label(self, space, item):
        return item.label()

    def index_of(self, t: TqMorphism) -> int:
        hs = hom_set(self.source, t.target)
        p = int(self.positions(t.target)[hs.index_of(t)])
        if p < 0:
            raise ValueError("morphism is not a basis element")
        return p

    def code_table(self, space: QuadSpace) -> np.ndarray:
        """Basis position indexed by ``akey * nsub + kidx`` (-1 if not a basis element)."""
        def compute():
            hs = hom_set(self.source, space)
            size = (1 << (self.source.dim * space.dim)) * hs.nsub
            table = np.full(size, -1, dtype=np.int32)
            r = self.rows(space)
            table[hs.codes[r]] = np.arange(r.size, dtype=np.int32)
            return table
        return self.cached(("codes", space), compute)

    def _plane_table(self, space: QuadSpace) -> np.ndarray:
        """For a 2-dim source: basis position of T∘g as a function of
        (T e0-data, T e1-data, [g(a+b) in K_T], kernel index of g), where the
        data of a vector is its image plus a K_T membership bit."""
        def compute():
            m = space.dim
            hw = hom_set(self.source, space)
            table = self.code_table(space)
            d = np.arange(1 << (m + 1), dtype=np.int64)
            x0, x1, k2, kg = np.meshgrid(d, d, np.arange(2), np.arange(5), indexing="ij")
            member = _subspace_index(2).member  # (5, 4)
            akey = (x0 & ((1 << m) - 1)) | ((x1 & ((1 << m) - 1)) << m)
            kmask = (1 | (((x0 >> m) & 1) & member[kg, 1]) << 1
                     | (((x1 >> m) & 1) & member[kg, 2]) << 2
                     | (k2 & member[kg, 3]) << 3)
            kidx = _mask_table(2)[kmask]
            out = np.where(kidx >= 0, table[akey * hw.nsub + np.maximum(kidx, 0)], -1)
            return out.reshape(-1).astype(np.int32)
        return self.cached(("plane", space), compute)

    def act_indices(self, batch: MorphismBatch) -> np.ndarray:
        if self.source.dim == 2:
            return self._act_plane(batch)
        return self._act_generic(batch)

    def _act_plane(self, batch: MorphismBatch) -> np.ndarray:
        U, W = batch.source, batch.target
        hu = hom_set(self.source, U)
        r = self.rows(U)
        c0 = hu.cols[r, 0].astype(np.intp)
        c1 = hu.cols[r, 1].astype(np.intp)
        c2 = c0 ^ c1
        kg = hu.kidx[r].astype(np.int32)
        table = self._plane_table(W)
        m = W.dim
        out = np.empty((len(batch), r.size), dtype=np.int64)
        step = max(1, (1 << 21) // max(1, r.size))
        for start, ch in batch.chunks(step):
            data = (ch.img | (ch.kin.astype(np.int64) << m)).astype(np.int32)
            x0 = data[:, c0]
            x1 = data[:, c1]
            k2 = ch.kin[:, c2].astype(np.int32)
            key = ((((x0 << (m + 1)) | x1) << 1) | k2) * 5 + kg
            out[start:start + len(ch)] = table[key]
        return out

    def _act_generic(self, batch: MorphismBatch) -> np.ndarray:
        U, W = batch.source, batch.target
        n = self.source.dim
        hu, hw = hom_set(self.source, U), hom_set(self.source, W)
        r = self.rows(U)
        gcols = hu.cols[r].astype(np.intp)
        gimg = hu.img[r].astype(np.intp)
        gkin = hu.kin[r]
        si = _subspace_index(n)
        by_mask = _mask_table(n)
        table = self.code_table(W)
        out = np.empty((len(batch), r.size), dtype=np.int64)
        step = max(1, (1 << 20) // max(1, r.size))
        for start, ch in batch.chunks(step):
            img = ch.img.astype(np.int32)
            akey = np.zeros((len(ch), r.size), dtype=np.int32)
            for i in range(n):
                akey |= img[:, gcols[:, i]] << (W.dim * i)
            kmask = np.ones((len(ch), r.size), dtype=np.int32)
            for x in range(1, 1 << n):
                hit = ch.kin[:, gimg[:, x]] & gkin[None, :, x]
                kmask |= hit.astype(np.int32) << x
            if by_mask is not None:
                kidx = by_mask[kmask]
            else:
                kidx = si.lookup_masks(kmask.astype(np.uint64))
            out[start:start + len(ch)] = table[akey * hw.nsub + kidx]
        return out


_MASK_TABLES: dict[int, np.ndarray | None] = {}


def _mask_table(n: int) -> np.ndarray | None:
    """Subspace index by membership mask, for n <= 4."""
    if n not in _MASK_TABLES:
        if n > 4:
            _MASK_TABLES[n] = None
        else:
            si = _subspace_index(n)
            t = np.full(1 << (1 << n), -1, dtype=np.int32)
            t[si.masks.astype(np.int64)] = np.arange(len(si.subs), dtype=np.int32)
            _MASK_TABLES[n] = t
    return _MASK_TABLES[n]


@lru_cache(maxsize=None)
def projective(v: QuadSpace) -> ProjectiveFunctor:
    return ProjectiveFunctor(v, name=f"P:{v.name}")


@lru_cache(maxsize=None)
def projective_layer(v: QuadSpace, i: int, mode: str = "layer") -> ProjectiveFunctor:
    """``sub``: ranks <= i; ``layer``: rank exactly i; ``quotient_top``: top rank."""
    if mode == "sub":
        return ProjectiveFunctor(v, 0, i, name=f"P:{v.name}:sub{i}")
    if mode == "layer":
        return ProjectiveFunctor(v, i, i, name=f"P:{v.name}:layer{i}")
    if mode == "quotient_top":
        return ProjectiveFunctor(v, v.dim, v.dim, name=f"P:{v.name}:top")
    raise ValueError(f"unknown layer mode {mode!r}")


_KIND_KERNEL = {"A": 0b01, "B": 0b10, "C": 0b11, "E": 0b01, "F": 0b10, "G": 0b11}


@lru_cache(maxsize=None)
def layer_summand(eps: int, kind: str) -> ProjectiveFunctor:
    """The rank-one morphisms out of ``H_eps`` of one kernel type."""
    v = parse_space(f"H{eps}")
    return ProjectiveFunctor(v, 1, 1, Subspace.span(2, [_KIND_KERNEL[kind]]),
                             name=f"P:{v.name}:layer1:{kind}")


class MixFunctor(ComputableFunctor):
    """Pairs (v1, v2) with q(v1 + v2) = alpha and B(v1, v2) = 1.

    A morphism sends (v1, v2) to (A v1, A v2) when v1 + v2 lies in K, else to 0.
    """

    monomial = True

    def __init__(self, alpha: int):
        self.alpha = alpha
        super().__init__(f"Mix{alpha}1")

    def codes(self, space: QuadSpace) -> np.ndarray:
        def compute():
            m = space.dim
            v = np.arange(1 << m, dtype=np.int64)
            v1, v2 = np.meshgrid(v, v, indexing="ij")
            q = np.array(space.qtab)[v1 ^ v2]
            bt = np.array(space.btab, dtype=np.int64)
            b = np.bitwise_count((v1 & bt[v2]).astype(np.uint64)) & 1
            ok = (q == self.alpha) & (b == 1)
            return np.sort((v1[ok] << m) | v2[ok])
        return self.cached(("codes", space), compute)

    def _dim(self, space):
        return int(self.codes(space).size)

    def _basis(self, space):
        m = space.dim
        return [(int(c) >> m, int(c) & ((1 << m) - 1)) for c in self.codes(space)]

    def label(self, space, item):
        return f"({bitstring(item[0], space.dim)},{bitstring(item[1], space.dim)})"

    def act_indices(self, batch):
        U, W = batch.source, batch.target
        cu = self.codes(U)
        mu = U.dim
        v1, v2 = cu >> mu, cu & ((1 << mu) - 1)
        rows = np.arange(len(batch))[:, None]
        codes = (batch.img[rows, v1[None]] << W.dim) | batch.img[rows, v2[None]]
        idx = _searchsorted_exact(self.codes(W), codes)
        return np.where(batch.kin[rows, (v1 ^ v2)[None]], idx, -1)


@lru_cache(maxsize=None)
def mix(alpha: int) -> MixFunctor:
    return MixFunctor(alpha)


class IsoFunctor(ComputableFunctor):
    """Isometric embeddings of a fixed space ``D``.

    A morphism sends f to A f when f(D) lies in K, else to 0.
    """

    monomial = True

    def __init__(self, d: QuadSpace, name: str | None = None):
        self.d = d
        super().__init__(name or f"iso:{d.name}")

    def cols(self, space: QuadSpace) -> np.ndarray:
        def compute():
            embs = isometric_embeddings(self.d, space)
            return np.array([e.cols for e in embs], dtype=np.int64).reshape(len(embs), self.d.dim)
        return self.cached(("cols", space), compute)

    def codes(self, space):
        return self.cached(("codes", space), lambda: _pack_last(self.cols(space), space.dim))

    def _dim(self, space):
        return int(self.cols(space).shape[0])

    def _basis(self, space):
        return [tuple(int(c) for c in row) for row in self.cols(space)]

    def label(self, space, item):
        return "[" + ",".join(bitstring(c, space.dim) for c in item) + "]"

    def act_indices(self, batch):
        fc = self.cols(batch.source)
        rows = np.arange(len(batch))[:, None, None]
        img = batch.img[rows, fc[None]]
        inside = batch.kin[rows, fc[None]].all(axis=-1)
        idx = _searchsorted_exact(self.codes(batch.target), _pack_last(img, batch.target.dim))
        return np.where(inside, idx, -1)


@lru_cache(maxsize=None)
def iso_nondeg(v: QuadSpace) -> IsoFunctor:
    return IsoFunctor(v)


@lru_cache(maxsize=None)
def iso_point(alpha: int) -> IsoFunctor:
    """Nonzero vectors w with q(w) = alpha."""
    return IsoFunctor(parse_space(f"x{alpha}"), name=f"iso:x{alpha}")


def _embedded_subspaces(d: QuadSpace, space: QuadSpace) -> list[Subspace]:
    seen = {}
    for e in isometric_embeddings(d, space):
        s = e.image()
        seen.setdefault(s, None)
    return sorted(seen, key=Subspace.sort_key)


def _element_code(elems: np.ndarray, width: int) -> np.ndarray:
    return _pack_last(np.sort(elems, axis=-1), width)


class OrbitFunctor(ComputableFunctor):
    """Subspaces of the target isometric to ``d`` (the embeddings modulo O(d)).

    U goes to A(U) when U lies in K, else to 0.
    """

    monomial = True

    def __init__(self, d: QuadSpace):
        self.d = d
        super().__init__(f"R:{d.name}")

    def subspaces(self, space):
        return self.cached(("subs", space), lambda: _embedded_subspaces(self.d, space))

    def elements(self, space) -> np.ndarray:
        def compute():
            k = (1 << self.d.dim) - 1
            return np.array([s.elements[1:] for s in self.subspaces(space)],
                            dtype=np.int64).reshape(-1, k)
        return self.cached(("elems", space), compute)

    def codes(self, space):
        return self.cached(("codes", space), lambda: _element_code(self.elements(space), space.dim))

    def _dim(self, space):
        return len(self.subspaces(space))

    def _basis(self, space):
        return self.subspaces(space)

    def label(self, space, item):
        return "<" + ",".join(bitstring(v, space.dim) for v in item.basis) + ">"

    def act_indices(self, batch):
        el = self.elements(batch.source)
        rows = np.arange(len(batch))[:, None, None]
        img = batch.img[rows, el[None]]
        inside = batch.kin[rows, el[None]].all(axis=-1)
        if not self.dim(batch.target):
            return np.full(inside.shape, -1, dtype=np.int64)
        order = np.argsort(self.codes(batch.target))
        sc = self.codes(batch.target)[order]
        idx = _searchsorted_exact(sc, _element_code(img, batch.target.dim))
        idx = np.where(idx >= 0, order[np.maximum(idx, 0)], -1)
        return np.where(inside, idx, -1)


class NaturalOrbitFunctor(ComputableFunctor):
    """Direct sum over subspaces U isometric to ``d`` of U itself.

    A vector u of U goes to A u in A(U) when U lies in K, else to 0.
    """

    def __init__(self, d: QuadSpace):
        self.d = d
        super().__init__(f"S:{d.name}")

    def subspaces(self, space):
        return self.cached(("subs", space), lambda: _embedded_subspaces(self.d, space))

    def _basis(self, space):
        return [(s, u) for s in self.subspaces(space) for u in s.basis]

    def label(self, space, item):
        s, u = item
        return "<" + ",".join(bitstring(v, space.dim) for v in s.basis) + ">:" + bitstring(u, space.dim)

    def _act(self, t):
        src, tgt = self.subspaces(t.source), self.subspaces(t.target)
        where = {s: k for k, s in enumerate(tgt)}
        offs, o = [], 0
        for s in tgt:
            offs.append(o)
            o += s.dim
        cols = []
        for s in src:
            inside = s.is_subspace_of(t.K)
            image = Subspace.span(t.target.dim, (t.A.apply(u) for u in s.basis)) if inside else None
            for u in s.basis:
                if not inside:
                    cols.append(0)
                    continue
                k = where[image]
                coords = image.coordinates(t.A.apply(u))
                cols.append(coords << offs[k])
        return BitMat.from_columns(cols, o)


class ConstantFunctor(ComputableFunctor):
    monomial = True

    def __init__(self):
        super().__init__("const")

    def _basis(self, space):
        return ["1"]

    def act_indices(self, batch):
        return np.zeros((len(batch), 1), dtype=np.int64)


@lru_cache(maxsize=None)
def constant() -> ConstantFunctor:
    return ConstantFunctor()


# --- functors of plain vector spaces, lifted along the forgetful functor ---

class VectProjective:
    """Linear maps GF(2)^n -> V, acted on by composition."""

    monomial = True

    def __init__(self, n: int):
        self.n = n
        self.name = f"PF{n}"

    def basis(self, m: int) -> list:
        from ..gf2 import unpack_columns
        return [unpack_columns(k, self.n, m) for k in range(1 << (self.n * m))]

    def dim(self, m: int) -> int:
        return 1 << (self.n * m)

    def act_indices(self, batch: MorphismBatch) -> np.ndarray:
        m_src, m_tgt = batch.source.dim, batch.target.dim
        keys = np.arange(1 << (self.n * m_src), dtype=np.int64)
        fcols = (keys[:, None] >> (m_src * np.arange(self.n))) & ((1 << m_src) - 1)
        rows = np.arange(len(batch))[:, None, None]
        return _pack_last(batch.img[rows, fcols[None]], m_tgt)


class ExteriorPower:
    """k-th exterior power; basis are k-subsets of coordinates."""

    monomial = False

    def __init__(self, k: int):
        self.k = k
        self.name = f"Lambda{k}"

    def basis(self, m: int) -> list:
        return list(combinations(range(m), self.k))

    def dim(self, m: int) -> int:
        return len(self.basis(m))

    def act_matrix(self, a: BitMat) -> BitMat:
        src, tgt = self.basis(a.cols), self.basis(a.rows)
        cols = []
        for s in src:
            c = 0
            for r, t in enumerate(tgt):
                sub = BitMat(self.k, self.k, tuple(
                    sum(a.entry(i, j) << jj for jj, j in enumerate(s)) for i in t))
                if sub.rank() == self.k:
                    c |= 1 << r
            cols.append(c)
        return BitMat.from_columns(cols, len(tgt))


class IotaFunctor(ComputableFunctor):
    """A functor of plain vector spaces applied to the underlying space and linear part."""

    def __init__(self, vect):
        self.vect = vect
        self.monomial = vect.monomial
        super().__init__(f"iota:{vect.name}")

    def _basis(self, space):
        return self.vect.basis(space.dim)

    def _dim(self, space):
        return self.vect.dim(space.dim)

    def label(self, space, item):
        if isinstance(self.vect, VectProjective):
            return "[" + ",".join(bitstring(c, space.dim) for c in item) + "]"
        return "^".join(f"e{i}" for i in item) or "1"

    def act_indices(self, batch):
        return self.vect.act_indices(batch)

    def _act(self, t):
        return self.vect.act_matrix(t.A)


def iota_lift(vect) -> IotaFunctor:
    return IotaFunctor(vect)


class TensorFunctor(ComputableFunctor):
    def __init__(self, f: ComputableFunctor, g: ComputableFunctor):
        self.f, self.g = f, g
        self.monomial = f.monomial and g.monomial
        super().__init__(f"tensor({f.name},{g.name})")

    def _basis(self, space):
        return [(a, b) for a in self.f.basis(space) for b in self.g.basis(space)]

    def _dim(self, space):
        return self.f.dim(space) * self.g.dim(space)

    def label(self, space, item):
        return f"{self.f.label(space, item[0])}*{self.g.label(space, item[1])}"

    def act_indices(self, batch):
        pf, pg = self.f.act_indices(batch), self.g.act_indices(batch)
        dg = self.g.dim(batch.target)
        out = pf[:, :, None] * dg + pg[:, None, :]
        out = np.where((pf[:, :, None] >= 0) & (pg[:, None, :] >= 0), out, -1)
        return out.reshape(len(batch), -1)

    def _act(self, t):
        a, b = self.f.act(t), self.g.act(t)
        return kron(a, b)


def kron(a: BitMat, b: BitMat) -> BitMat:
    rows = []
    for ra in a.data:
        for rb in b.data:
            r = 0
            for j in range(a.cols):
                if (ra >> j) & 1:
                    r |= rb << (j * b.cols)
            rows.append(r)
    return BitMat(a.rows * b.rows, a.cols * b.cols, tuple(rows))


def tensor(f: ComputableFunctor, g: ComputableFunctor) -> TensorFunctor:
    return TensorFunctor(f, g)


class DirectSumFunctor(ComputableFunctor):
    def __init__(self, *parts: ComputableFunctor):
        self.parts = parts
        self.monomial = all(p.monomial for p in parts)
        super().__init__("sum(" + ",".join(p.name for p in parts) + ")")

    def _basis(self, space):
        return [(k, b) for k, p in enumerate(self.parts) for b in p.basis(space)]

    def _dim(self, space):
        return sum(p.dim(space) for p in self.parts)

    def label(self, space, item):
        return f"{item[0]}:{self.parts[item[0]].label(space, item[1])}"

    def act_indices(self, batch):
        outs, off = [], 0
        for p in self.parts:
            idx = p.act_indices(batch)
            outs.append(np.where(idx >= 0, idx + off, -1))
            off += p.dim(batch.target)
        if not outs:
            return np.zeros((len(batch), 0), dtype=np.int64)
        return np.concatenate(outs, axis=1)

    def _act(self, t):
        m = BitMat.zero(0, 0)
        for p in self.parts:
            m = m.block_diag(p.act(t))
        return m


def direct_sum(*parts: ComputableFunctor) -> DirectSumFunctor:
    return DirectSumFunctor(*parts)
