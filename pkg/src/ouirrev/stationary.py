"""Stationary Gaussian law of a non-sweeping model and the stationary
thermodynamic quantities built on it: covariance, entropy production rate,
heat dissipation rate, affinity/flux, fluctuation-dissipation residuals,
two-time covariance.

The Gaussian closed forms used here are derived by taking expectations of the
defining integrands under the stationary law P = N(0, Xi), with
grad log P = -Xi^{-1} x and drift b(x) = -B x:

    epr = (1/2) tr(M^T A M Xi),        M = 2 A^{-1} B - Xi^{-1}
    hdr = 2 tr(B^T A^{-1} B Xi) - tr(B)

Both are cross-validated against quadrature of the defining integrals in the
test suite before being trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import NoStationaryLawError
from .model import Classification, LinearModel, Verdict, classify

# Threshold separating "zero epr" from genuinely positive epr: well above
# accumulated 1e-10-level linear-algebra noise, far below physical values.
EPS_EPR = 1e-8


@dataclass(frozen=True, eq=False)
class StationaryLaw:
    """Stationary Gaussian law N(0, Xi) plus cached derived quantities."""

    model: LinearModel
    Xi: np.ndarray
    Xi_inv: np.ndarray
    epr: float
    fdr_standard_residual: float
    fdr_strong_residual: float
    classification: Classification
    chol_Xi: np.ndarray = field(repr=False)
    # M = 2 A^{-1} B - Xi^{-1}; the affinity is Pi(x) = -M x.
    M: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ForceFlux:
    """Thermodynamic force and probability flux per unit density at a point."""

    affinity: np.ndarray
    flux: np.ndarray
    mechanical_force: np.ndarray


def stationary_law(model: LinearModel) -> StationaryLaw:
    """Construct the stationary law by solving B Xi + Xi B^T = A.

    Raises
    ------
    NoStationaryLawError
        For sweeping models, which have no integrable stationary density.
    """
    cls = classify(model)
    if cls.verdict is Verdict.SWEEPING:
        raise NoStationaryLawError(
            "model is sweeping (eigenvalue real part <= 0); no stationary law exists"
        )
    xi = linalg.solve_lyapunov(model.B, model.A)
    chol = linalg.chol_spd(xi)
    xi_inv = np.linalg.solve(xi, np.eye(model.n))
    xi_inv = 0.5 * (xi_inv + xi_inv.T)
    ainv_b = np.linalg.solve(model.A, model.B)
    m_mat = 2.0 * ainv_b - xi_inv
    epr = 0.5 * float(np.trace(m_mat.T @ model.A @ m_mat @ xi))
    epr = max(epr, 0.0)
    a_norm = float(np.linalg.norm(model.A))
    standard = float(np.linalg.norm(model.B @ xi + xi @ model.B.T - model.A)) / (1.0 + a_norm)
    strong = float(np.linalg.norm(model.A - 2.0 * model.B @ xi)) / (1.0 + a_norm)
    return StationaryLaw(
        model=model,
        Xi=xi,
        Xi_inv=xi_inv,
        epr=epr,
        fdr_standard_residual=standard,
        fdr_strong_residual=strong,
        classification=cls,
        chol_Xi=chol,
        M=m_mat,
    )


def entropy_production_rate(law: StationaryLaw) -> float:
    """Stationary entropy production rate (1/2) tr(M^T A M Xi); nonnegative,
    zero exactly for reversible models."""
    return law.epr


def heat_dissipation_rate_stationary(law: StationaryLaw) -> float:
    """Stationary mean heat dissipation rate 2 tr(B^T A^{-1} B Xi) - tr(B).

    Equals the entropy production rate in any stationary state (the entropy
    balance has zero entropy change there).
    """
    model = law.model
    ainv_b = np.linalg.solve(model.A, model.B)
    return 2.0 * float(np.trace(model.B.T @ ainv_b @ law.Xi)) - float(np.trace(model.B))


def two_time_covariance(law: StationaryLaw, tau: float) -> np.ndarray:
    """Stationary two-time covariance R(tau) = E[x(t + tau) x(t)^T].

    R(tau) = e^{-B tau} Xi for tau >= 0 and R(-tau) = R(tau)^T.
    """
    tau = float(tau)
    if tau >= 0.0:
        return linalg.expm(-law.model.B * tau) @ law.Xi
    return law.Xi @ linalg.expm(-law.model.B.T * (-tau))


def force_flux(law: StationaryLaw, x) -> ForceFlux:
    """Thermodynamic force (affinity), flux per unit density, and mechanical
    force at state x.

    affinity Pi(x) = 2 A^{-1} b(x) - grad log P(x) = -M x; the probability
    flux is J = (P/2) A Pi, returned here per unit density as (1/2) A Pi.
    """
    xv = np.asarray(x, dtype=float)
    if xv.shape != (law.model.n,):
        raise ValueError(f"state must have shape ({law.model.n},), got {xv.shape}")
    affinity = -(law.M @ xv)
    ainv_b = np.linalg.solve(law.model.A, law.model.B)
    mechanical = -2.0 * (ainv_b @ xv)
    flux = 0.5 * (law.model.A @ affinity)
    return ForceFlux(affinity=affinity, flux=flux, mechanical_force=mechanical)


def fdr_residuals(law: StationaryLaw) -> tuple[float, float]:
    """(standard, strong) fluctuation-dissipation residuals, both relative.

    standard = ||B Xi + Xi B^T - A||_F / (1 + ||A||_F)  (holds for every law)
    strong   = ||A - 2 B Xi||_F / (1 + ||A||_F)         (zero iff reversible)
    """
    return law.fdr_standard_residual, law.fdr_strong_residual


def stationary_density(law: StationaryLaw, x) -> float:
    """Stationary Gaussian density at x with the standard normalization
    (2 pi)^{-n/2} det(Xi)^{-1/2}."""
    xv = np.asarray(x, dtype=float)
    n = law.model.n
    if xv.shape != (n,):
        raise ValueError(f"state must have shape ({n},), got {xv.shape}")
    quad = float(xv @ law.Xi_inv @ xv)
    logdet = 2.0 * float(np.sum(np.log(np.diag(law.chol_Xi))))
    return float(np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * n * np.log(2.0 * np.pi)))
