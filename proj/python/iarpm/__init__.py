"""Globally optimal point-set registration by inner approximation."""

from ._iarpm import (
    IarpmError,
    brute_force_assignment,
    brute_force_register,
    generate_trial,
    max_kcard_assignment,
    model_kinds,
    register,
    residual_energy,
    rms_error,
    shape_names,
    solve_phi,
)

__all__ = [
    "IarpmError",
    "brute_force_assignment",
    "brute_force_register",
    "generate_trial",
    "max_kcard_assignment",
    "model_kinds",
    "register",
    "residual_energy",
    "rms_error",
    "shape_names",
    "solve_phi",
]
