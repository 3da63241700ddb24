"""Lie-group representation, metrics, means and random generation of elasticity tensors."""

__version__ = "0.1.0"

from .classes import (
    CLASS_SPECS, LieTriple, SymmetryClass, build_full, build_reduced, check_reduced_form,
    class_spec, parse_class, symmetry_generators, triple_from_reduced,
)
from .errors import BranchError, ConvergenceError, ValidationError
from .field import FieldSpec, Grid1D, MaternCov, interpolate_field, kl_decompose, sample_random_field
from .kelvin import (
    bone_kelvin, directional_young_modulus, isotropic_kelvin, kelvin_from_tensor, tensor_from_kelvin,
    voigt_to_kelvin, vrep, vrep_inv,
)
from .lie import Trep, exp_so3, expm_skew, log_rotation, trep
from .means import frechet_mean, mean_euclid, mean_product, mean_rotation
from .metrics import MetricWeights, dist_euclid, dist_product, dist_product_canonical, geodesic
from .stochastic import GenConfig, random_kelvin, sample_params

__all__ = [
    "CLASS_SPECS", "LieTriple", "SymmetryClass", "build_full", "build_reduced", "check_reduced_form",
    "class_spec", "parse_class", "symmetry_generators", "triple_from_reduced",
    "BranchError", "ConvergenceError", "ValidationError",
    "FieldSpec", "Grid1D", "MaternCov", "interpolate_field", "kl_decompose", "sample_random_field",
    "bone_kelvin", "directional_young_modulus", "isotropic_kelvin", "kelvin_from_tensor",
    "tensor_from_kelvin", "voigt_to_kelvin", "vrep", "vrep_inv",
    "Trep", "exp_so3", "expm_skew", "log_rotation", "trep",
    "frechet_mean", "mean_euclid", "mean_product", "mean_rotation",
    "MetricWeights", "dist_euclid", "dist_product", "dist_product_canonical", "geodesic",
    "GenConfig", "random_kelvin", "sample_params",
]
