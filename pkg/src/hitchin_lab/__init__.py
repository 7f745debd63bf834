"""Hitchin representations of genus-2 surface groups: construction, limit
curves in the flag manifold, and numerical certificates of their positivity
and Anosov properties."""

from .config import SceneConfig, Tolerances
from .errors import HitchinLabError
from .flags import FlagChain, Subspace, SumResult, flag_distance, orthonormalize, subspace_sum
from .reports import CheckReport
from .representations import SurfaceRep, bend, compose_irreducible, fuchsian_genus2, sym_power
from .surface_group import Word, ball, evaluate

__all__ = [
    "CheckReport", "FlagChain", "HitchinLabError", "SceneConfig", "Subspace", "SumResult", "SurfaceRep",
    "Tolerances", "Word", "ball", "bend", "compose_irreducible", "evaluate", "flag_distance",
    "fuchsian_genus2", "orthonormalize", "subspace_sum", "sym_power",
]
