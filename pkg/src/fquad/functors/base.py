from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from ..gf2 import BitMat
from ..quad import QuadSpace
from ..tq import MorphismBatch, TqMorphism


@dataclass(frozen=True)
class FunctorValue:
    functor: str
    space: QuadSpace
    dim: int
    labels: tuple[str, ...]

    def to_json(self) -> dict:
        return {"functor": self.functor, "space": self.space.name, "dim": self.dim,
                "labels": list(self.labels)}


class ComputableFunctor:
    """A functor from quadratic spaces to GF(2)-vector spaces.

    Subclasses give a basis at every space and the action of each morphism.
    Monomial functors send every basis element to a basis element or to zero;
    they implement ``act_indices`` on whole batches and get ``act`` for free.
    Others implement ``_act`` returning a dense matrix.
    """

    monomial = False

    def __init__(self, name: str):
        self.name = name
        self._cache: dict = {}
        self._lock = threading.RLock()

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    def cached(self, key, compute):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]

    def basis(self, space: QuadSpace) -> list:
        return self.cached(("basis", space), lambda: list(self._basis(space)))

    def _basis(self, space: QuadSpace) -> list:
        raise NotImplementedError

    def dim(self, space: QuadSpace) -> int:
        return self.cached(("dim", space), lambda: self._dim(space))

    def _dim(self, space: QuadSpace) -> int:
        return len(self.basis(space))

    def label(self, space: QuadSpace, item) -> str:
        return str(item)

    def value(self, space: QuadSpace) -> FunctorValue:
        return FunctorValue(self.name, space, self.dim(space),
                            tuple(self.label(space, b) for b in self.basis(space)))

    def act(self, t: TqMorphism) -> BitMat:
        if self.monomial:
            idx = self.act_indices(MorphismBatch.from_morphisms([t]))[0]
            rows = self.dim(t.target)
            return BitMat.from_columns([(1 << int(i)) if i >= 0 else 0 for i in idx], rows)
        return self._act(t)

    def _act(self, t: TqMorphism) -> BitMat:
        raise NotImplementedError

    def act_indices(self, batch: MorphismBatch) -> np.ndarray:
        """``(N, dim F(source))`` image indices, -1 where the image is zero."""
        raise NotImplementedError(f"{self.name} is not monomial")


def monomial_rank(idx: np.ndarray) -> int:
    """Rank of a matrix whose columns are unit vectors or zero."""
    return int(np.unique(idx[idx >= 0]).size)
