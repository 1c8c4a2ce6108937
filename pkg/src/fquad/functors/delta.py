"""Kernels of the projection away from a hyperbolic summand."""
from __future__ import annotations

from ..gf2 import BitMat, Subspace, bits_of
from ..quad import QuadSpace, hyperbolic, orthogonal_sum
from ..tq import MorphismBatch, TqMorphism, identity, orth_sum_morphism
from .base import ComputableFunctor, monomial_rank


def drop_summand(v: QuadSpace, eps: int) -> TqMorphism:
    """``V ⊥ H_eps -> V``: projection onto V with kernel subspace V."""
    h = hyperbolic(eps)
    src = orthogonal_sum(v, h)
    A = BitMat.from_columns([1 << i for i in range(v.dim)] + [0] * h.dim, v.dim)
    return TqMorphism(src, v, A, Subspace(src.dim, tuple(1 << i for i in range(v.dim))))


def nullspace_free(m: BitMat) -> tuple[list[int], list[int]]:
    """Free columns and the matching null vectors.

    Each null vector has exactly the bit of its own free column among free
    columns, so coordinates of a null vector are its bits at those columns.
    """
    from ..gf2 import _echelon
    ech = _echelon(m.data)
    pivots = [(r & -r).bit_length() - 1 for r in ech]
    pset = set(pivots)
    free, vecs = [], []
    for f in range(m.cols):
        if f in pset:
            continue
        v = 1 << f
        for r, p in zip(ech, pivots):
            if (r >> f) & 1:
                v |= 1 << p
        free.append(f)
        vecs.append(v)
    return free, vecs


class DeltaFunctor(ComputableFunctor):
    """``V -> Ker F(V ⊥ H_eps -> V)`` with the action restricted from ``F(t ⊥ id)``."""

    def __init__(self, eps: int, inner: ComputableFunctor):
        self.eps = eps
        self.inner = inner
        self.monomial = False
        super().__init__(f"Delta{eps}({inner.name})")

    def projection(self, v: QuadSpace) -> TqMorphism:
        return drop_summand(v, self.eps)

    def _dim(self, space):
        t = self.projection(space)
        total = self.inner.dim(t.source)
        if self.inner.monomial:
            idx = self.inner.act_indices(MorphismBatch.from_morphisms([t]))[0]
            return total - monomial_rank(idx)
        return total - self.inner.act(t).rank()

    def kernel(self, space: QuadSpace) -> tuple[list[int], list[int]]:
        return self.cached(("ker", space), lambda: nullspace_free(self.inner.act(self.projection(space))))

    def _basis(self, space):
        return self.kernel(space)[1]

    def label(self, space, item):
        return "k" + format(item, "x")

    def _act(self, t):
        h = hyperbolic(self.eps)
        big = orth_sum_morphism(t, identity(h))
        m = self.inner.act(big)
        _, src = self.kernel(t.source)
        free, _ = self.kernel(t.target)
        fpos = {f: k for k, f in enumerate(free)}
        _, tvecs = self.kernel(t.target)
        cols = []
        for v in src:
            u = m.apply(v)
            coords = 0
            check = 0
            for b in bits_of(u):
                k = fpos.get(b)
                if k is not None:
                    coords |= 1 << k
                    check ^= tvecs[k]
            if check != u:
                raise ArithmeticError("restricted action leaves the kernel")
            cols.append(coords)
        return BitMat.from_columns(cols, len(free))


def delta(eps: int, f: ComputableFunctor) -> DeltaFunctor:
    return DeltaFunctor(eps, f)
