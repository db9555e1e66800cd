"""Radial degree-one minimizers of the p-Ginzburg-Landau energy."""

from ._core import (
    Error,
    InvalidArgument,
    NumericalError,
    Profile,
    audit,
    coefficient_signs,
    distance_to_limit,
    energy,
    f_infinity,
    g_vs_g0,
    pohozaev_check,
    solve,
    stability_survey,
    sup_distance,
    tail_constants,
    test_function_energy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
