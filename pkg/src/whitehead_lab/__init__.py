"""Additive and multiplicative descriptions of group rings of finite p-groups, machine-checked."""

from .errors import WhiteheadLabError
from .groups import FiniteGroup, Subgroup, build_group, catalog_group, named_group
from .grouprings import GroupRingElt, conj_basis, group_basis, log_unit
from .padic import PrecisionContext

__all__ = [
    "FiniteGroup",
    "GroupRingElt",
    "PrecisionContext",
    "Subgroup",
    "WhiteheadLabError",
    "build_group",
    "catalog_group",
    "conj_basis",
    "group_basis",
    "log_unit",
    "named_group",
]

__version__ = "0.1.0"
