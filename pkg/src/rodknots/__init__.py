"""Constant-torsion space curves: elastic rods, Bäcklund transformations, knot diagnostics."""

from .backlund import (DoubleBTSpec, SingleBTSpec, closed_double_bt, closed_single_bt_rod,
                       double_bt, single_bt, solve_beta)
from .curves import SampledCurve, closure_defect, integrate_frenet, measure_geometry, repeat_cover
from .elliptic import jacobi, jacobi_zeta, make_modulus, theta_suite
from .invariants import (crossing_count, killing_residual_order1, linking, min_self_distance,
                         self_linking, verify_linking_theorem, writhe)
from .rod import RodParams, build_rod, find_torus_rod, p_max, rod_params
from .spectral import FloquetRoot, SpectralSolution, find_floquet_roots, riccati_solve

__version__ = "0.1.0"

__all__ = [
    "DoubleBTSpec", "SingleBTSpec", "closed_double_bt", "closed_single_bt_rod", "double_bt",
    "single_bt", "solve_beta", "SampledCurve", "closure_defect", "integrate_frenet",
    "measure_geometry", "repeat_cover", "jacobi", "jacobi_zeta", "make_modulus", "theta_suite",
    "crossing_count", "killing_residual_order1", "linking", "min_self_distance", "self_linking",
    "verify_linking_theorem", "writhe", "RodParams", "build_rod", "find_torus_rod", "p_max",
    "rod_params", "FloquetRoot", "SpectralSolution", "find_floquet_roots", "riccati_solve",
]
