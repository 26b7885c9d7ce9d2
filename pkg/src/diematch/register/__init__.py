"""Rigid registration of coin-face pairs."""

from .descriptors import load_external_descriptors, match_descriptors, save_descriptors
from .driver import REGISTRATION_METHODS, refine_icp, register_pair
from .fpfh import compute_fpfh
from .icp import icp, random_restart_icp
from .kabsch import kabsch, kabsch_from_arrays
from .robust import robust_estimate
from .types import (
    CorrespondenceSet,
    DescriptorField,
    RegistrationParams,
    RegistrationResult,
)

__all__ = [
    "REGISTRATION_METHODS",
    "CorrespondenceSet",
    "DescriptorField",
    "RegistrationParams",
    "RegistrationResult",
    "compute_fpfh",
    "icp",
    "kabsch",
    "kabsch_from_arrays",
    "load_external_descriptors",
    "match_descriptors",
    "random_restart_icp",
    "refine_icp",
    "register_pair",
    "robust_estimate",
    "save_descriptors",
]
