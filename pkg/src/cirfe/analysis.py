"""Asymptotic covariance of the time-scaled error and empirical checks of the convergence claims.

The network-averaged estimate of each component follows a scalar-gain
stochastic approximation ``z <- (I - a Q S / (t+1)) z + a V / (t+1)`` with
noise covariance ``Q S Q``, where ``S = sum_n P_n H_n^T R_n^{-1} H_n P_n`` and
``Q = diag(1 / Q_i)`` with ``Q_i`` the number of agents interested in
component ``i``. ``Q S`` is not symmetric, so the covariance is computed in the
coordinates ``w = Q^{-1/2} z`` where the drift ``a Q^{1/2} S Q^{1/2}`` is.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cirfe.censor import restrict
from cirfe.graph import EmptyInterestError
from cirfe.sensing import NetworkModel

PSD_TOL = 1e-10


class CovarianceError(ValueError):
    """The requested gain gives an infinite asymptotic covariance."""


def interest_counts(interests, n: int) -> np.ndarray:
    """Diagonal matrix ``diag(1 / Q_i)``."""
    counts = np.zeros(n)
    for s in interests:
        counts[list(s.indices)] += 1
    if np.any(counts == 0):
        missing = [int(i) + 1 for i in np.flatnonzero(counts == 0)]
        raise EmptyInterestError(f"components {missing} are in no interest set")
    return np.diag(1.0 / counts)


@dataclass(frozen=True)
class AsymptoticCovariance:
    s_r: np.ndarray
    eigvecs: np.ndarray
    rates: np.ndarray

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.s_r).copy()


def asymptotic_covariance(model: NetworkModel, a: float, r_weight=None) -> AsymptoticCovariance:
    """Limit covariance of ``sqrt(t+1) (x_n(t) - theta)`` (lifted, N x N).

    ``rates`` are the eigenvalues of the drift ``a Q^{1/2} S Q^{1/2}``; all of
    them must exceed 1/2.
    """
    if r_weight is not None:
        return _weighted_covariance(model, a, r_weight)
    q = interest_counts(model.interests, model.n)
    s = model.projected_information()
    q_half = np.sqrt(q)
    drift = a * q_half @ s @ q_half
    drift = 0.5 * (drift + drift.T)
    rates, p = np.linalg.eigh(drift)
    if rates[0] <= 0.5:
        raise CovarianceError(
            f"gain too small for finite asymptotic covariance: slowest rate {rates[0]:.4g} <= 1/2"
        )
    # noise of the scaled recursion in w-coordinates: a^2 Q^{-1/2} (Q S Q) Q^{-1/2} = a * drift
    noise = p.T @ (a * drift) @ p
    m = noise / (rates[:, None] + rates[None, :] - 1.0)
    cov_w = p @ m @ p.T
    s_r = q_half @ cov_w @ q_half
    return AsymptoticCovariance(0.5 * (s_r + s_r.T), p, rates)


def _weighted_covariance(model, a, r_weight):
    """Covariance when the innovation uses weights ``W_n`` instead of ``R_n^{-1}``.

    Drift is ``a Q S_W``, noise covariance ``Q (sum_n P_n H_n^T W_n R_n W_n H_n P_n) Q``.
    Solved as a Lyapunov equation since the drift is no longer self-adjoint in a
    common metric.
    """
    from scipy.linalg import solve_continuous_lyapunov

    n = model.n
    q = interest_counts(model.interests, n)
    masks = model.masks()
    s_w = np.zeros((n, n))
    noise = np.zeros((n, n))
    for k, sm in enumerate(model.sensing):
        w = r_weight[k]
        g = masks[k][:, None] * sm.h.T
        s_w += g @ w @ sm.h * masks[k][None, :]
        noise += g @ w @ sm.r @ w @ g.T
    drift = a * q @ s_w
    ev = np.linalg.eigvals(drift)
    if ev.real.min() <= 0.5:
        raise CovarianceError(f"gain too small: slowest rate {ev.real.min():.4g} <= 1/2")
    shifted = drift - 0.5 * np.eye(n)
    s_r = solve_continuous_lyapunov(shifted, a * a * q @ noise @ q)
    return AsymptoticCovariance(0.5 * (s_r + s_r.T), np.eye(n), np.sort(ev.real))


def classical_asymptotic_covariance(model: NetworkModel, a: float) -> np.ndarray:
    """Closed form for full interest sets: ``(a^2/N^2) G (2 a G / N - I)^{-1}``.

    ``G = sum_n H_n^T R_n^{-1} H_n``. Interest sets of ``model`` are ignored.
    """
    n = model.n
    g = sum(s.information() for s in model.sensing)
    mat = 2.0 * a * g / n - np.eye(n)
    if np.linalg.eigvalsh(0.5 * (mat + mat.T))[0] <= 0:
        raise CovarianceError("gain too small for finite asymptotic covariance")
    out = (a * a / (n * n)) * g @ np.linalg.inv(mat)
    return 0.5 * (out + out.T)


def uniform_interest_covariance(model: NetworkModel, a: float, q_tilde: int) -> np.ndarray:
    """Closed form when every component has exactly ``q_tilde`` interested agents.

    Follows from the eigen construction: ``a I/(2 q) + (4 S / q - 2 I / a)^{-1} / q``.
    """
    s = model.projected_information()
    n = model.n
    return a * np.eye(n) / (2 * q_tilde) + np.linalg.inv(4 * s / q_tilde - 2 * np.eye(n) / a) / q_tilde


def displayed_uniform_covariance(model: NetworkModel, a: float, q_tilde: int) -> np.ndarray:
    """``a I/(2 q) + ((1/N) sum H^T R^{-1} H + I/(2a))^{-1} / q``.

    Kept for comparison only. It disagrees with :func:`asymptotic_covariance`
    and with Monte Carlo runs (for N = 1, H = R = a/2 = 1 it gives 1.8 where the
    empirical value is 4/3).
    """
    n = model.n
    g = sum(s.information() for s in model.sensing) / n
    return a * np.eye(n) / (2 * q_tilde) + np.linalg.inv(g + np.eye(n) / (2 * a)) / q_tilde


def normalized_error(estimates, theta, interests) -> np.ndarray:
    """``||x_n - theta_{I_n}|| / |I_n|`` per agent."""
    return np.array(
        [np.linalg.norm(np.asarray(x) - restrict(theta, s)) / len(s) for x, s in zip(estimates, interests)]
    )


def mse_decay_slope(t, mse, window=(1e3, 1e5)) -> float:
    """Least-squares slope of ``log(mse)`` against ``log(t)`` over ``window``."""
    t = np.asarray(t, dtype=float)
    mse = np.asarray(mse, dtype=float)
    lo, hi = window
    if not hi > lo >= 1:
        raise ValueError("window must satisfy t_hi > t_lo >= 1")
    sel = (t >= lo) & (t <= hi) & (mse > 0)
    if sel.sum() < 10:
        raise ValueError(f"only {int(sel.sum())} points in window {window}; need at least 10")
    slope, _ = np.polyfit(np.log(t[sel]), np.log(mse[sel]), 1)
    return float(slope)


@dataclass(frozen=True)
class ScaledCovariance:
    per_entry: np.ndarray   # (N agents, N components), NaN outside the interest sets
    pooled: np.ndarray      # (N components,)
    trials: int


def empirical_scaled_covariance(final_lifted, theta, masks, t: int, min_trials: int = 100) -> ScaledCovariance:
    """Sample variance of ``sqrt(t+1) (x - theta)`` per (agent, component).

    ``final_lifted`` is (trials, N, N). ``pooled`` averages the per-agent
    variances over the agents interested in each component.
    """
    x = np.asarray(final_lifted, dtype=float)
    if x.shape[0] < min_trials:
        raise ValueError(f"need at least {min_trials} trials, got {x.shape[0]}")
    masks = np.asarray(masks, dtype=float)
    scaled = np.sqrt(t + 1.0) * (x - masks * np.asarray(theta)[None, None, :]) * masks
    var = scaled.var(axis=0, ddof=1)
    per_entry = np.where(masks > 0, var, np.nan)
    pooled = np.nanmean(per_entry, axis=0)
    return ScaledCovariance(per_entry, pooled, x.shape[0])
