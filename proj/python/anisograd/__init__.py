"""Anisotropic stochastic optimization toolkit (python surface).

The heavy lifting lives in the compiled ``_anisograd`` module; this package
re-exports it.
"""

from ._anisograd import (
    bound,
    box_diameters,
    dataset_stats,
    logistic_loss_grad,
    project,
    ratios,
    run_one,
    step_size,
    theory_step_size,
    weighted_norm,
)

__all__ = [
    "bound",
    "box_diameters",
    "dataset_stats",
    "logistic_loss_grad",
    "project",
    "ratios",
    "run_one",
    "step_size",
    "theory_step_size",
    "weighted_norm",
]

__version__ = "0.1.0"
