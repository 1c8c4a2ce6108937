"""Quadratic spaces over GF(2) and computable functors on their cospan category."""
from .gf2 import BitMat, BitVec, Subspace
from .quad import Isometry, QuadSpace, arf, is_isometric, orthogonal_sum, parse_space
from .tq import TqMorphism, compose, enumerate_hom, make_morphism

__all__ = [
    "BitMat", "BitVec", "Subspace", "Isometry", "QuadSpace", "arf", "is_isometric",
    "orthogonal_sum", "parse_space", "TqMorphism", "compose", "enumerate_hom", "make_morphism",
]
__version__ = "0.1.0"
