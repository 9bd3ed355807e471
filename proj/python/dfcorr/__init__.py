"""Dynamic factor correlation models."""

import json

from . import _core
from ._core import (
    DomainError,
    SpecError,
    StructureError,
    ValidationError,
    bic,
    block_of_eta,
    corr_of_gamma,
    eta_of_block,
    gamma_of_corr,
    loglik,
    matrix_log,
    rho_of_tau,
    simulate_factor,
    tau_of_rho,
)

__all__ = [
    "DomainError",
    "SpecError",
    "StructureError",
    "ValidationError",
    "bic",
    "block_of_eta",
    "corr_of_gamma",
    "egarch_fit",
    "eta_of_block",
    "evaluate_oos",
    "fit_decoupled",
    "fit_factor",
    "fit_joint",
    "gamma_of_corr",
    "loglik",
    "matrix_log",
    "rho_of_tau",
    "simulate_factor",
    "tau_of_rho",
]


def egarch_fit(returns):
    """Fit AR(1)-EGARCH; returns (params dict, standardized series, sigma)."""
    params, z, sigma = _core.egarch_fit(returns)
    return json.loads(params), z, sigma


def fit_factor(f, dist="mt", max_iter=0):
    """Fit the factor correlation model; returns (report dict, orthogonalized factors U)."""
    report, u = _core.fit_factor(f, dist, max_iter)
    return json.loads(report), u


def fit_decoupled(z, u, group_sizes, sectors=(), structure="fbc", dist="gauss", scaling="tikhonov", max_iter=0):
    return json.loads(_core.fit_decoupled(z, u, list(group_sizes), list(sectors), structure, dist, scaling, max_iter))


def fit_joint(z, u, group_sizes, sectors=(), structure="fbc", dist="gauss", scaling="tikhonov", max_iter=0):
    return json.loads(_core.fit_joint(z, u, list(group_sizes), list(sectors), structure, dist, scaling, max_iter))


def evaluate_oos(fit, z, u, split):
    """Out-of-sample split of the log-likelihood for a core fit report."""
    return json.loads(_core.evaluate_oos(json.dumps(fit), z, u, split))
