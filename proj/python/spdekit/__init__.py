"""Spectral simulation and parameter estimation for stochastic reaction-diffusion equations."""

from ._core import (
    Basis,
    Error,
    FormatError,
    InvalidArgument,
    Noise,
    NumericalError,
    Term,
    Trajectory,
    build_basis,
    clt_variance,
    confidence_interval,
    estimate,
    identify_noise,
    lasso_path,
    load_modes,
    modes_to_grid,
    normal_equations,
    plain_diffusivity,
    project_frames,
    save_modes,
    simulate,
    simulate_fhn,
    weyl_constant,
)

__all__ = [
    "Basis",
    "Error",
    "FormatError",
    "InvalidArgument",
    "Noise",
    "NumericalError",
    "Term",
    "Trajectory",
    "build_basis",
    "clt_variance",
    "confidence_interval",
    "estimate",
    "identify_noise",
    "lasso_path",
    "load_modes",
    "modes_to_grid",
    "normal_equations",
    "plain_diffusivity",
    "project_frames",
    "save_modes",
    "simulate",
    "simulate_fhn",
    "weyl_constant",
]
