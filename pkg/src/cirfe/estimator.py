"""Consensus+innovations updates: per-agent CIRFE, the compact lifted form, and the classical baseline.

All updates are synchronous: every agent reads the step-``t`` snapshot.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from cirfe.censor import (
    InterestSet,
    build_censored_laplacian,
    censor_received,
    censor_self,
    interest_masks,
    lift,
    lift_all,
    network_projector,
    restrict,
)
from cirfe.sensing import NetworkModel

S_P_TOL = 1e-9


class EstimatorKind(str, Enum):
    CIRFE = "cirfe"
    CLASSICAL = "classical"
    CIRFE_IDENTITY_WEIGHT = "cirfe_identity_weight"
    CIRFE_PLUGIN_COVARIANCE = "cirfe_plugin_covariance"


@dataclass(frozen=True)
class WeightSchedule:
    """``alpha_t = a / (t + 1 + offset)`` and ``beta_t = beta0 / (t + 1 + offset)**delta1``.

    ``offset = 0`` is the plain schedule. A positive offset delays the decay
    so that the first steps are not unstable for stiff models; it leaves the
    asymptotic behaviour unchanged.
    """

    a: float
    beta0: float = 1.0
    delta1: float = 0.25
    offset: int = 0

    def __post_init__(self):
        if self.a <= 0 or self.beta0 <= 0:
            raise ValueError("gains a and beta0 must be positive")
        if not 0.0 < self.delta1 < 0.5:
            raise ValueError(f"delta1 must lie in (0, 1/2), got {self.delta1}")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")

    def alpha(self, t: int) -> float:
        return self.a / (t + 1 + self.offset)

    def beta(self, t: int) -> float:
        return self.beta0 / (t + 1 + self.offset) ** self.delta1

    def to_dict(self) -> dict:
        return {"a": self.a, "beta0": self.beta0, "delta1": self.delta1, "offset": self.offset}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSchedule":
        return cls(float(d["a"]), float(d.get("beta0", 1.0)), float(d.get("delta1", 0.25)), int(d.get("offset", 0)))


@dataclass(frozen=True)
class NetworkState:
    """Local estimates of every agent at step ``t``."""

    estimates: tuple[np.ndarray, ...]
    t: int = 0

    @classmethod
    def zeros(cls, interests) -> "NetworkState":
        return cls(tuple(np.zeros(len(s)) for s in interests), 0)

    @classmethod
    def from_lifted(cls, lifted, interests, t: int = 0) -> "NetworkState":
        n = len(interests)
        rows = np.asarray(lifted, dtype=float).reshape(n, n)
        return cls(tuple(restrict(row, s) for row, s in zip(rows, interests)), t)

    def lifted(self, interests) -> np.ndarray:
        """Stacked lifted state as an (N, N) array (row = agent)."""
        return lift_all(self.estimates, interests, len(interests))

    def to_dict(self, interests) -> dict:
        return {
            "t": self.t,
            "agents": [
                {"agent": k + 1, "interest": s.to_list(), "estimate": x.tolist()}
                for k, (x, s) in enumerate(zip(self.estimates, interests))
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkState":
        agents = sorted(d["agents"], key=lambda a: a["agent"])
        return cls(tuple(np.array(a["estimate"], dtype=float) for a in agents), int(d["t"]))

    def to_json(self, interests) -> str:
        return json.dumps(self.to_dict(interests))


def _weight(model: NetworkModel, k: int, weights):
    return model.sensing[k].r_inv if weights is None else weights[k]


def cirfe_step(state: NetworkState, model: NetworkModel, schedule: WeightSchedule,
               lap_t: np.ndarray, observations, weights=None) -> NetworkState:
    """One synchronous CIRFE update written agent by agent with censored messages.

    ``weights`` optionally replaces each ``R_n^{-1}`` (identity weighting or a
    plug-in estimate).
    """
    n = model.n
    t = state.t
    if len(state.estimates) != n or len(observations) != n:
        raise ValueError("need one estimate and one observation vector per agent")
    beta, alpha = schedule.beta(t), schedule.alpha(t)
    new = []
    for k in range(n):
        ik = model.interests[k]
        xk = np.asarray(state.estimates[k], dtype=float)
        if xk.shape != (len(ik),):
            raise ValueError(f"agent {k + 1}: estimate shape {xk.shape} does not match its interest set")
        consensus = np.zeros(len(ik))
        for l in range(n):
            if l == k or lap_t[k, l] == 0.0:
                continue
            il = model.interests[l]
            # -L[k, l] is the link weight (1 for an active edge)
            consensus += -lap_t[k, l] * (censor_self(xk, ik, il) - censor_received(state.estimates[l], il, ik))
        s = model.sensing[k]
        y = np.atleast_1d(np.asarray(observations[k], dtype=float))
        residual = y - s.h @ lift(xk, ik, n)
        innovation = restrict(s.h.T @ (_weight(model, k, weights) @ residual), ik)
        new.append(xk - beta * consensus + alpha * innovation)
    return NetworkState(tuple(new), t + 1)


def stacked_sensing(model: NetworkModel):
    """Block-diagonal pieces of the compact form: ``G_H`` (N^2 x M) and ``R^{-1}`` (M x M)."""
    n = model.n
    ms = [s.m for s in model.sensing]
    total = sum(ms)
    gh = np.zeros((n * n, total))
    r_inv = np.zeros((total, total))
    row = 0
    for k, s in enumerate(model.sensing):
        gh[k * n:(k + 1) * n, row:row + s.m] = s.h.T
        r_inv[row:row + s.m, row:row + s.m] = s.r_inv
        row += s.m
    return gh, r_inv


def compact_step(lifted_state, model: NetworkModel, schedule: WeightSchedule, lap_t: np.ndarray,
                 stacked_obs, t: int, r_inv=None) -> np.ndarray:
    """One update of the stacked N^2 lifted state using the censored Laplacian."""
    n = model.n
    x = np.asarray(lifted_state, dtype=float).ravel()
    proj = network_projector(model.interests, n)
    if np.linalg.norm(x - proj * x) > S_P_TOL:
        raise ValueError("lifted state has mass outside the interest sets")
    gh, r_inv_default = stacked_sensing(model)
    w = r_inv_default if r_inv is None else r_inv
    lp = build_censored_laplacian(lap_t, model.interests)
    y = np.asarray(stacked_obs, dtype=float).ravel()
    innovation = proj * (gh @ (w @ (y - gh.T @ (proj * x))))
    return x - schedule.beta(t) * lp.matvec(x) + schedule.alpha(t) * innovation


def classical_step(states, model: NetworkModel, schedule: WeightSchedule, lap_t: np.ndarray,
                   observations, t: int) -> np.ndarray:
    """Classical consensus+innovations update; every agent holds a full N-vector.

    ``states`` is (N, N) with row ``n`` the estimate of agent ``n``.
    """
    n = model.n
    x = np.asarray(states, dtype=float)
    if x.shape != (n, n):
        raise ValueError(f"classical state must be ({n}, {n}), got {x.shape}")
    adj = -(lap_t - np.diag(np.diag(lap_t)))
    consensus = adj.sum(axis=1)[:, None] * x - adj @ x
    innovation = np.zeros_like(x)
    for k, s in enumerate(model.sensing):
        y = np.atleast_1d(np.asarray(observations[k], dtype=float))
        innovation[k] = s.h.T @ (s.r_inv @ (y - s.h @ x[k]))
    return x - schedule.beta(t) * consensus + schedule.alpha(t) * innovation


class PluginCovariance:
    """Running empirical covariance of one agent's observations and its regularized inverse."""

    def __init__(self, m: int, gamma0: float = 1.0):
        self.count = 0
        self.sum = np.zeros(m)
        self.sum_sq = np.zeros((m, m))
        self.gamma0 = gamma0

    def update(self, y) -> None:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        self.count += 1
        self.sum += y
        self.sum_sq += np.outer(y, y)

    def covariance(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros_like(self.sum_sq)
        mean = self.sum / self.count
        return self.sum_sq / self.count - np.outer(mean, mean)

    def gamma(self, t: int) -> float:
        return self.gamma0 / (t + 1)

    def inverse(self, t: int) -> np.ndarray:
        q = self.covariance()
        return np.linalg.inv(q + self.gamma(t) * np.eye(q.shape[0]))


def plugin_covariance_update(stats: PluginCovariance, y_t, t: int, gamma_t: float | None = None) -> np.ndarray:
    """Fold ``y_t`` into ``stats`` and return ``(Q + gamma_t I)^{-1}``."""
    if t < 1:
        raise ValueError("plug-in covariance needs t >= 1")
    stats.update(y_t)
    g = stats.gamma(t) if gamma_t is None else gamma_t
    if g <= 0:
        raise ValueError("regularizer must be positive")
    q = stats.covariance()
    return np.linalg.inv(q + g * np.eye(q.shape[0]))


class BatchKernel:
    """Vectorized update of many independent trials at once.

    States are arrays of shape (B, N, N): trial, agent, component, holding the
    lifted estimates. The arithmetic mirrors :func:`compact_step` (for CIRFE
    kinds) and :func:`classical_step` (all masks equal to one), and for full
    interest sets the two coincide bit for bit.
    """

    def __init__(self, model: NetworkModel, kind: EstimatorKind | str = EstimatorKind.CIRFE,
                 gamma0: float = 1.0):
        self.model = model
        self.kind = EstimatorKind(kind)
        n = model.n
        self.n = n
        if self.kind is EstimatorKind.CLASSICAL:
            self.interests = tuple(InterestSet(tuple(range(n))) for _ in range(n))
        else:
            self.interests = model.interests
        self.mask = interest_masks(self.interests, n)
        self.h_rows = np.vstack([s.h for s in model.sensing])
        self.owner = np.concatenate([np.full(s.m, k) for k, s in enumerate(model.sensing)])
        self.m_total = self.h_rows.shape[0]
        self.r_inv = np.zeros((self.m_total, self.m_total))
        row = 0
        self.slices = []
        for s in model.sensing:
            self.r_inv[row:row + s.m, row:row + s.m] = s.r_inv
            self.slices.append(slice(row, row + s.m))
            row += s.m
        if self.kind is EstimatorKind.CIRFE_IDENTITY_WEIGHT:
            self.r_inv = np.eye(self.m_total)
        self._diag_weight = bool(np.all(self.r_inv == np.diag(np.diag(self.r_inv))))
        self._w_diag = np.diag(self.r_inv).copy()
        # gather matrix: agent k sums the rows it owns
        self.gather = np.zeros((n, self.m_total))
        self.gather[self.owner, np.arange(self.m_total)] = 1.0
        adj = model.graph_process.base.adjacency()
        self.static_adj = adj if model.graph_process.static else None
        self.static_deg = None if self.static_adj is None else adj @ self.mask
        self.gamma0 = gamma0
        self.plugin = self.kind is EstimatorKind.CIRFE_PLUGIN_COVARIANCE

    def initial(self, batch: int) -> np.ndarray:
        return np.zeros((batch, self.n, self.n))

    def truth(self) -> np.ndarray:
        return self.mask * self.model.theta[None, :]

    def new_plugin_stats(self, batch: int):
        m = self.m_total
        return {"count": 0, "sum": np.zeros((batch, m)), "sum_sq": np.zeros((batch, m, m))}

    def _plugin_weights(self, stats, t: int) -> np.ndarray:
        """Block-diagonal inverse covariance estimates built from y(0..t-1), shape (B, M, M)."""
        batch = stats["sum"].shape[0]
        w = np.zeros((batch, self.m_total, self.m_total))
        if stats["count"] < 2:
            w[:] = np.eye(self.m_total)
            return w
        c = stats["count"]
        mean = stats["sum"] / c
        cov = stats["sum_sq"] / c - mean[:, :, None] * mean[:, None, :]
        g = self.gamma0 / (t + 1)
        for sl in self.slices:
            blk = cov[:, sl, sl] + g * np.eye(sl.stop - sl.start)
            w[:, sl, sl] = np.linalg.inv(blk)
        return w

    def step(self, x: np.ndarray, t: int, schedule: WeightSchedule, y: np.ndarray,
             adjacency: np.ndarray | None = None, plugin_stats=None) -> np.ndarray:
        """Advance every trial one step. ``y`` is (B, M); ``adjacency`` is (B, N, N) or None for static."""
        mask = self.mask
        if adjacency is None:
            if self.static_adj is None:
                raise ValueError("random graph process: pass the step's adjacency matrices")
            adj, deg = self.static_adj, self.static_deg
            consensus = mask * (deg * x - adj @ x)
        else:
            deg = adjacency @ mask
            consensus = mask * (deg * x - adjacency @ x)
        pred = np.einsum("mj,bmj->bm", self.h_rows, x[:, self.owner, :])
        res = y - pred
        if self.plugin:
            w = self._plugin_weights(plugin_stats, t)
            weighted = np.einsum("bij,bj->bi", w, res)
            plugin_stats["count"] += 1
            plugin_stats["sum"] += y
            plugin_stats["sum_sq"] += y[:, :, None] * y[:, None, :]
        elif self._diag_weight:
            weighted = res * self._w_diag
        else:
            weighted = res @ self.r_inv
        innovation = mask * (self.gather @ (weighted[:, :, None] * self.h_rows[None, :, :]))
        return x - schedule.beta(t) * consensus + schedule.alpha(t) * innovation
