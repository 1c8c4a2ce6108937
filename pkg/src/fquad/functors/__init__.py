"""Computable functors on quadratic spaces and natural transformations between them."""
from .base import ComputableFunctor, FunctorValue
from .delta import DeltaFunctor, delta, drop_summand
from .library import (ConstantFunctor, DirectSumFunctor, ExteriorPower, IotaFunctor, IsoFunctor,
                      MixFunctor, NaturalOrbitFunctor, OrbitFunctor, ProjectiveFunctor,
                      TensorFunctor, VectProjective, constant, direct_sum, iota_lift, iso_nondeg,
                      iso_point, layer_summand, mix, projective, projective_layer, tensor)
from .names import SHIPPED, functor_by_name, shipped_functors
from .nat import (NatTransform, check_naturality, hom_space, identity_transform, is_natural,
                  yoneda)

__all__ = [
    "ComputableFunctor", "FunctorValue", "DeltaFunctor", "delta", "drop_summand",
    "ConstantFunctor", "DirectSumFunctor", "ExteriorPower", "IotaFunctor", "IsoFunctor",
    "MixFunctor", "NaturalOrbitFunctor", "OrbitFunctor", "ProjectiveFunctor", "TensorFunctor",
    "VectProjective", "constant", "direct_sum", "iota_lift", "iso_nondeg", "iso_point",
    "layer_summand", "mix", "projective", "projective_layer", "tensor", "SHIPPED",
    "functor_by_name", "shipped_functors", "NatTransform", "check_naturality", "hom_space",
    "identity_transform", "is_natural", "yoneda",
]
