"""Approximated Optimal Transport diffusion toolkit (C++ core bindings)."""

from ._core import (
    AnalyticDenoiser,
    DenoiserModel,
    RuntimeError,
    Trajectory,
    ValidationError,
    assignment_cost,
    brute_force_solve,
    curvature,
    empirical_w2,
    euler_sample_oracle,
    heun_sample_oracle,
    hungarian_solve,
    load_checkpoint_model,
    loss_weight,
    make_mixture,
    pair_noise,
    timesteps,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticDenoiser",
    "DenoiserModel",
    "RuntimeError",
    "Trajectory",
    "ValidationError",
    "assignment_cost",
    "brute_force_solve",
    "curvature",
    "empirical_w2",
    "euler_sample_oracle",
    "heun_sample_oracle",
    "hungarian_solve",
    "load_checkpoint_model",
    "loss_weight",
    "make_mixture",
    "pair_noise",
    "timesteps",
    "train",
]
