"""Cylindrical contact homology of quasi-regular Boothby-Wang bundles, graded by Conley-Zehnder indices."""

from .boothby_wang import BundleSpec, Convention, first_chern_xi, maslov_index
from .homology_engine import GradedRanks, compare, compute, enumerate_family, poincare_series
from .orbifold_base import custom, product_projective, wang_ziller, weighted_projective

__all__ = [
    "BundleSpec",
    "Convention",
    "GradedRanks",
    "compare",
    "compute",
    "custom",
    "enumerate_family",
    "first_chern_xi",
    "maslov_index",
    "poincare_series",
    "product_projective",
    "wang_ziller",
    "weighted_projective",
]
