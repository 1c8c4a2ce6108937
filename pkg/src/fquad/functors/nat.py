"""Natural transformations, exhaustive naturality checks and Hom spaces.

Transformations are stored per space as matrices. For the vectorised checks a
matrix is held as its columns, each column a bit-packed ``uint64`` vector
over the target basis. A stack of ``d`` transformations at a space is an
array of shape ``(d, dim F, words)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from ..gf2 import BitMat, Eliminator
from ..quad import QuadSpace
from ..tq import MorphismBatch, TqMorphism, hom_set
from .base import ComputableFunctor

_BUDGET = 1 << 22  # uint64 words per chunk


def nwords(n: int) -> int:
    return max(1, (n + 63) // 64)


def pack_bits(bits: np.ndarray, n: int) -> np.ndarray:
    """Bool/0-1 array with last axis ``n`` -> uint64 words."""
    nw = nwords(n)
    b = np.packbits(bits.astype(np.uint8), axis=-1, bitorder="little")
    pad = nw * 8 - b.shape[-1]
    if pad:
        b = np.concatenate([b, np.zeros(b.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(b).view("<u8").reshape(bits.shape[:-1] + (nw,))


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    b = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(b, axis=-1, bitorder="little", count=n).astype(bool) if n else \
        np.zeros(words.shape[:-1] + (0,), dtype=bool)


def matrix_to_columns(m: BitMat) -> np.ndarray:
    """``(cols, words)`` packed columns of ``m``."""
    nw = nwords(m.rows)
    out = np.zeros((m.cols, nw), dtype=np.uint64)
    for j, c in enumerate(m.columns):
        if c:
            out[j] = np.frombuffer(c.to_bytes(nw * 8, "little"), dtype="<u8")
    return out


def columns_to_matrix(cols: np.ndarray, rows: int) -> BitMat:
    ints = [int.from_bytes(np.ascontiguousarray(c.astype("<u8")).tobytes(), "little") for c in cols]
    return BitMat.from_columns(ints, rows)


def matrix_to_numpy(m: BitMat) -> np.ndarray:
    out = np.zeros((m.rows, m.cols), dtype=np.uint8)
    for i, r in enumerate(m.data):
        if r:
            out[i] = unpack_bits(np.frombuffer(r.to_bytes(nwords(m.cols) * 8, "little"),
                                               dtype="<u8"), m.cols)
    return out


def onehot(n: int) -> np.ndarray:
    """Unit vectors as packed rows; row ``n`` is zero."""
    nw = nwords(n)
    out = np.zeros((n + 1, nw), dtype=np.uint64)
    i = np.arange(n)
    out[i, i // 64] = np.uint64(1) << (i % 64).astype(np.uint64)
    return out


class NatTransform:
    """Components indexed by space; ``builder`` fills in spaces on demand."""

    def __init__(self, source: ComputableFunctor, target: ComputableFunctor,
                 components: dict | None = None,
                 builder: Callable[[QuadSpace], BitMat] | None = None, name: str = ""):
        self.source = source
        self.target = target
        self.components = dict(components or {})
        self.builder = builder
        self.name = name

    def __repr__(self):
        return f"<NatTransform {self.name or '?'}: {self.source.name} -> {self.target.name}>"

    def component(self, space: QuadSpace) -> BitMat:
        c = self.components.get(space)
        if c is None:
            if self.builder is None:
                raise KeyError(f"no component at {space.name}")
            c = self.builder(space)
            self.components[space] = c
        if (c.rows, c.cols) != (self.target.dim(space), self.source.dim(space)):
            raise ValueError(f"component at {space.name} has the wrong shape")
        return c

    def spaces(self) -> list[QuadSpace]:
        return list(self.components)

    def after(self, other: NatTransform) -> NatTransform:
        """``self ∘ other``."""
        if other.target is not self.source and other.target.name != self.source.name:
            raise ValueError("transformations are not composable")
        return NatTransform(other.source, self.target,
                            builder=lambda s: self.component(s) @ other.component(s),
                            name=f"{self.name}*{other.name}")

    compose = after

    def __add__(self, other: NatTransform) -> NatTransform:
        return NatTransform(self.source, self.target,
                            builder=lambda s: self.component(s) + other.component(s),
                            name=f"{self.name}+{other.name}")

    def is_zero_on(self, spaces: Iterable[QuadSpace]) -> bool:
        return all(self.component(s).is_zero() for s in spaces)

    def equals_on(self, other: NatTransform, spaces: Iterable[QuadSpace]) -> bool:
        return all(self.component(s) == other.component(s) for s in spaces)

    def to_json(self, spaces: Iterable[QuadSpace]) -> dict:
        return {"source": self.source.name, "target": self.target.name, "name": self.name,
                "components": {s.name: self.component(s).to_bitstrings() for s in spaces}}


def identity_transform(f: ComputableFunctor) -> NatTransform:
    return NatTransform(f, f, builder=lambda s: BitMat.identity(f.dim(s)), name="id")


# --- residuals ------------------------------------------------------------

def _dense_stack(functor: ComputableFunctor, batch: MorphismBatch) -> list[np.ndarray]:
    return [matrix_to_numpy(functor.act(t)) for t in batch]


def _apply_target(G: ComputableFunctor, batch: MorphismBatch, CU: np.ndarray) -> np.ndarray:
    """``G(T) c`` for every morphism T and every packed column c: ``(N, d, f, words_W)``."""
    U, W = batch.source, batch.target
    gu, gw = G.dim(U), G.dim(W)
    d, f, _ = CU.shape
    if G.monomial:
        pig = G.act_indices(batch)
        pig = np.where(pig < 0, gw, pig)
        pig = np.concatenate([pig, np.full((len(batch), 1), gw, dtype=pig.dtype)], axis=1)
        bits = unpack_bits(CU, gu)
        smax = int(bits.sum(axis=-1).max()) if bits.size else 0
        oh = onehot(gw)
        out = np.zeros((len(batch), d, f, nwords(gw)), dtype=np.uint64)
        if smax == 0:
            return out
        # supports padded with the sentinel column gu
        order = np.argsort(~bits, axis=-1, kind="stable")[..., :smax]
        present = np.take_along_axis(bits, order, axis=-1)
        supp = np.where(present, order, gu)
        for s in range(smax):
            out ^= oh[pig[:, supp[..., s]]]
        return out
    bits = unpack_bits(CU, gu).astype(np.int64)
    out = np.empty((len(batch), d, f, nwords(gw)), dtype=np.uint64)
    for r, m in enumerate(_dense_stack(G, batch)):
        prod = (bits @ m.T.astype(np.int64)) & 1
        out[r] = pack_bits(prod, gw)
    return out


def _precompose_source(F: ComputableFunctor, batch: MorphismBatch, CW: np.ndarray) -> np.ndarray:
    """Columns of ``eta_W F(T)``: ``(N, d, f_U, words_W)``."""
    U, W = batch.source, batch.target
    fu, fw = F.dim(U), F.dim(W)
    d, _, nw = CW.shape
    if F.monomial:
        pif = F.act_indices(batch)
        pif = np.where(pif < 0, fw, pif)
        ext = np.concatenate([CW, np.zeros((d, 1, nw), dtype=np.uint64)], axis=1)
        return ext[:, pif].transpose(1, 0, 2, 3)
    out = np.empty((len(batch), d, fu, nw), dtype=np.uint64)
    cwbits = None
    for r, m in enumerate(_dense_stack(F, batch)):
        if cwbits is None:
            cwbits = unpack_bits(CW, 64 * nw).astype(np.int64)
        prod = np.einsum("lj,klg->kjg", m.astype(np.int64), cwbits) & 1
        out[r] = pack_bits(prod, 64 * nw)[..., :nw]
    return out


def _chunk_size(d: int, f: int, nw: int, smax: int) -> int:
    per = max(1, d * max(f, 1) * nw * max(smax, 1))
    return max(1, _BUDGET // per)


def residuals(F: ComputableFunctor, G: ComputableFunctor, batch: MorphismBatch,
              CU: np.ndarray, CW: np.ndarray) -> np.ndarray:
    """``G(T) eta_U - eta_W F(T)`` as packed columns, ``(N, d, f_U, words_W)``."""
    return _apply_target(G, batch, CU) ^ _precompose_source(F, batch, CW)


def _stack(eta: NatTransform, space: QuadSpace) -> np.ndarray:
    return matrix_to_columns(eta.component(space))[None]


@dataclass
class NaturalityReport:
    ok: bool
    checked: int = 0
    failure: TqMorphism | None = None
    pairs: list = field(default_factory=list)


_PRIMITIVE = {2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x89, 8: 0x11D,
              9: 0x211, 10: 0x409, 11: 0x805, 12: 0x1053}


@lru_cache(maxsize=None)
def bch_syndromes(n: int, t: int) -> np.ndarray | None:
    """Syndromes of the unit vectors of GF(2)^n for a BCH code of designed distance 2t+1.

    Entry i packs ``alpha^i, alpha^3i, ..., alpha^(2t-1)i`` in GF(2^m). Any 2t
    entries are linearly independent, so a vector of weight at most 2t is zero
    exactly when its syndrome is. Returns None when the syndrome needs more
    than 64 bits. A trailing zero entry serves as a sentinel.
    """
    m = max(2, n.bit_length())
    if m not in _PRIMITIVE or m * t > 64:
        return None
    order = (1 << m) - 1
    power = [1] * order
    for i in range(1, order):
        x = power[i - 1] << 1
        power[i] = x ^ _PRIMITIVE[m] if x >> m else x
    out = np.zeros(n + 1, dtype=np.uint64)
    for i in range(n):
        s = 0
        for k in range(t):
            s |= power[((2 * k + 1) * i) % order] << (m * k)
        out[i] = s
    return out


def _supports(C: np.ndarray, rows: int) -> np.ndarray:
    """``(f, s)`` indices of set bits per packed column, padded with ``rows``."""
    bits = unpack_bits(C, rows)
    smax = int(bits.sum(axis=-1).max()) if bits.size else 0
    order = np.argsort(~bits, axis=-1, kind="stable")[..., :smax]
    present = np.take_along_axis(bits, order, axis=-1)
    return np.where(present, order, rows)


class _SyndromeCheck:
    """Residuals of a transformation between monomial functors, compared by syndrome."""

    def __init__(self, eta: NatTransform, U: QuadSpace, W: QuadSpace):
        F, G = eta.source, eta.target
        self.ok = F.monomial and G.monomial
        if not self.ok:
            return
        gw = G.dim(W)
        self.supp_u = _supports(_stack(eta, U)[0], G.dim(U))
        supp_w = _supports(_stack(eta, W)[0], gw)
        weight = self.supp_u.shape[-1] + supp_w.shape[-1]
        synd = bch_syndromes(gw, max(1, (weight + 1) // 2))
        if synd is None:
            self.ok = False
            return
        self.synd = synd
        self.gw, self.fw = gw, F.dim(W)
        # syndrome of each eta_W column, plus a zero sentinel for F(T) sending to 0
        col = np.zeros(self.fw + 1, dtype=np.uint64)
        for k in range(supp_w.shape[-1]):
            col[:self.fw] ^= synd[supp_w[:, k]]
        self.colsynd = col
        self.F, self.G = F, G

    def bad(self, batch: MorphismBatch) -> np.ndarray:
        pig = self.G.act_indices(batch)
        pig = np.where(pig < 0, self.gw, pig)
        pig = np.concatenate([pig, np.full((len(batch), 1), self.gw, dtype=pig.dtype)], axis=1)
        lhs = np.zeros((len(batch), self.supp_u.shape[0]), dtype=np.uint64)
        for k in range(self.supp_u.shape[-1]):
            lhs ^= self.synd[pig[:, self.supp_u[:, k]]]
        pif = self.F.act_indices(batch)
        rhs = self.colsynd[np.where(pif < 0, self.fw, pif)]
        return np.flatnonzero((lhs != rhs).any(axis=1))


def check_naturality(eta: NatTransform, site: Sequence[QuadSpace]) -> NaturalityReport:
    """Test ``G(T) eta_U = eta_W F(T)`` for every morphism between site spaces."""
    F, G = eta.source, eta.target
    checked = 0
    pairs = []
    for U in site:
        CU = _stack(eta, U)
        for W in site:
            CW = _stack(eta, W)
            hs = hom_set(U, W)
            fast = _SyndromeCheck(eta, U, W)
            if fast.ok:
                size = max(1, (1 << 21) // max(1, F.dim(U), G.dim(U)))
            else:
                size = _chunk_size(1, F.dim(U), CW.shape[-1], 8)
            for start, ch in hs.chunks(size):
                if fast.ok:
                    bad = fast.bad(ch)
                else:
                    res = residuals(F, G, ch, CU, CW)
                    bad = np.flatnonzero(res.reshape(len(ch), -1).any(axis=1))
                if bad.size:
                    return NaturalityReport(False, checked + int(bad[0]),
                                            hs.morphism(start + int(bad[0])), pairs)
                checked += len(ch)
            pairs.append((U.name, W.name, len(hs)))
    return NaturalityReport(True, checked, None, pairs)


def is_natural(eta: NatTransform, site: Sequence[QuadSpace]) -> bool:
    return check_naturality(eta, site).ok


# --- solving for all natural transformations -------------------------------

class _Candidates:
    """A basis of transformations satisfying every constraint seen so far."""

    def __init__(self):
        self.d = 0
        self.stack: dict[QuadSpace, np.ndarray] = {}

    def add_space(self, W: QuadSpace, cols: np.ndarray):
        self.stack[W] = cols

    def grow(self, W: QuadSpace, free: list[int], gw: int):
        """New independent candidates: one per free column entry at ``W``."""
        k = len(free) * gw
        if not k:
            return
        for U, arr in self.stack.items():
            pad = np.zeros((k,) + arr.shape[1:], dtype=np.uint64)
            self.stack[U] = np.concatenate([arr, pad], axis=0)
        arr = self.stack[W]
        oh = onehot(gw)
        n = self.d
        for j in free:
            for g in range(gw):
                arr[n, j] = oh[g]
                n += 1
        self.d += k

    def reduce(self, rows: Iterable[int]):
        el = Eliminator()
        for r in rows:
            el.add(r)
        if not el.rank:
            return
        null = el.nullspace(self.d)
        for U, arr in self.stack.items():
            new = np.zeros((len(null),) + arr.shape[1:], dtype=np.uint64)
            for i, v in enumerate(null):
                k = v
                while k:
                    low = k & -k
                    new[i] ^= arr[low.bit_length() - 1]
                    k ^= low
            self.stack[U] = new
        self.d = len(null)


def _constraint_rows(res: np.ndarray) -> set[int]:
    """Each residual bit gives one linear condition on the candidates."""
    n, d = res.shape[0], res.shape[1]
    flat = res.transpose(0, 2, 3, 1).reshape(-1, d)
    flat = flat[flat.any(axis=1)]
    if not flat.size:
        return set()
    flat = np.unique(flat, axis=0)
    bits = ((flat[:, :, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    bits = bits.transpose(0, 2, 1).reshape(-1, d)
    bits = bits[bits.any(axis=1)]
    packed = np.packbits(bits, axis=-1, bitorder="little")
    packed = np.unique(packed, axis=0)
    return {int.from_bytes(row.tobytes(), "little") for row in packed}


def _hit_columns(F: ComputableFunctor, processed: list[QuadSpace], W: QuadSpace):
    """For each basis element of F(W), some (U, row, i) with F(T_row) e_i = e_j."""
    fw = F.dim(W)
    found: dict[int, tuple] = {}
    if not F.monomial:
        return found
    for U in processed:
        fu = F.dim(U)
        if not fu:
            continue
        hs = hom_set(U, W)
        for start, ch in hs.chunks(_chunk_size(1, fu, 1, 1)):
            idx = F.act_indices(ch).ravel()
            ok = idx >= 0
            vals, first = np.unique(idx[ok], return_index=True)
            pos = np.flatnonzero(ok)[first]
            for j, p in zip(vals.tolist(), pos.tolist()):
                if j not in found:
                    found[j] = (U, start + p // fu, p % fu)
            if len(found) == fw:
                return found
    return found


def hom_space(F: ComputableFunctor, G: ComputableFunctor,
              site: Sequence[QuadSpace]) -> list[NatTransform]:
    """A basis of the natural transformations F -> G on the site.

    Spaces are processed in order. Columns of a new component reachable from
    earlier spaces are forced by naturality; the rest become unknowns. After
    each space every morphism between processed spaces is imposed exactly.
    """
    cand = _Candidates()
    processed: list[QuadSpace] = []
    for W in site:
        fw, gw = F.dim(W), G.dim(W)
        nww = nwords(gw)
        cols = np.zeros((cand.d, fw, nww), dtype=np.uint64)
        hits = _hit_columns(F, processed, W)
        for j, (U, row, i) in hits.items():
            one = hom_set(U, W).take([row])
            cols[:, j] = _apply_target(G, one, cand.stack[U][:, [i]])[0, :, 0]
        cand.add_space(W, cols)
        free = [j for j in range(fw) if j not in hits]
        cand.grow(W, free, gw)
        processed.append(W)
        for U in processed:
            directions = [(U, W)] if U == W else [(U, W), (W, U)]
            for a, b in directions:
                _impose(F, G, a, b, cand)
                if cand.d == 0:
                    break
    return [
        NatTransform(F, G, {S: columns_to_matrix(cand.stack[S][k], G.dim(S)) for S in processed},
                     name=f"b{k}")
        for k in range(cand.d)
    ]


def _impose(F, G, U, W, cand: _Candidates):
    fu = F.dim(U)
    if cand.d == 0 or fu == 0 or G.dim(W) == 0:
        return
    hs = hom_set(U, W)
    start = 0
    while start < len(hs) and cand.d:
        CU, CW = cand.stack[U], cand.stack[W]
        size = _chunk_size(cand.d, fu, CW.shape[-1], 4)
        ch = hs.slice(start, start + size)
        res = residuals(F, G, ch, CU, CW)
        if res.any():
            cand.reduce(_constraint_rows(res))
            # the reduced basis satisfies this chunk; continue from the next one
        start += size


def yoneda(F: ComputableFunctor, v: QuadSpace, x: int) -> NatTransform:
    """The transformation from the representable at ``v`` sending identity to ``x``.

    ``x`` is a bit-packed vector of F(v). At W the morphism g goes to F(g) x.
    """
    from .library import projective
    P = projective(v)

    def build(W: QuadSpace) -> BitMat:
        hs = hom_set(v, W)
        fw = F.dim(W)
        cv = np.zeros((1, 1, nwords(F.dim(v))), dtype=np.uint64)
        if x:
            cv[0, 0] = np.frombuffer(x.to_bytes(nwords(F.dim(v)) * 8, "little"), dtype="<u8")
        out = _apply_target(F, hs, cv)[:, 0, 0]
        return columns_to_matrix(out, fw)

    return NatTransform(P, F, builder=build, name=f"yoneda({F.name},{v.name})")
