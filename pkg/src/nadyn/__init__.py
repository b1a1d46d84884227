"""Exact finite-scale analysis of non-autonomous discrete dynamical systems."""

from .analysis import (
    MeshParams,
    Status,
    Verdict,
    check_dense_periodicity,
    check_minimality,
    check_sensitivity,
    check_topological_mixing,
    check_transitivity,
    check_weak_mixing,
    find_invariant_trap,
    find_scrambled_pairs,
)
from .engine import (
    Family,
    find_periodic_points,
    identity_collapse,
    omega,
    orbit,
    reduce_to_autonomous,
    transfer_witness_from_autonomous,
)
from .entropy import (
    Cover,
    JoinedCover,
    compare_family_vs_composition,
    cover_entropy,
    join,
    lap_entropy,
    mesh_cover,
    min_subcover_cardinality,
    pullback,
)
from .exact import QAlpha, Rat, rat
from .intervals import IntervalSet
from .plmap import PLMap, compose, image, lap_count, preimage, solve_fixed_points

__version__ = "0.1.0"
