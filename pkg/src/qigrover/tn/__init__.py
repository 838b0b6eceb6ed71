"""Tensor-network engine: MPS/MPO containers and their core algorithms."""
from .core import (
    DEFAULT_CUTOFF,
    Mpo,
    Mps,
    Scaled,
    TruncationPolicy,
    add,
    amplitude,
    apply_mpo,
    basis_state,
    canonicalize,
    compress,
    identity_mpo,
    inner,
    mpo_to_dense,
    norm_squared,
    normalize,
    product_state,
    project_site,
    scale,
    to_dense,
    zero_like,
)
from .entropy import BondEntropy, entanglement_profile, schmidt_entropy
from .sampling import enumerate_support, sample

__all__ = [
    "DEFAULT_CUTOFF",
    "BondEntropy",
    "Mpo",
    "Mps",
    "Scaled",
    "TruncationPolicy",
    "add",
    "amplitude",
    "apply_mpo",
    "basis_state",
    "canonicalize",
    "compress",
    "entanglement_profile",
    "enumerate_support",
    "identity_mpo",
    "inner",
    "mpo_to_dense",
    "norm_squared",
    "normalize",
    "product_state",
    "project_site",
    "sample",
    "scale",
    "schmidt_entropy",
    "to_dense",
    "zero_like",
]
