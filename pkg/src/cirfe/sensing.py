"""Linear sensing models, interest sets and the observability/connectivity checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from cirfe.censor import InterestSet, build_censored_laplacian, network_projector
from cirfe.graph import (
    EmptyInterestError,
    Graph,
    LaplacianProcess,
    induced_subgraph,
    is_connected_spectral,
    laplacian,
)

COUPLING_TOL = 1e-12
RANK_RTOL = 1e-8
A5_TOL = 1e-8


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


class GainError(ValueError):
    """No innovation gain can satisfy the gain condition for this model."""


@dataclass(frozen=True)
class SensingModel:
    """``y = h @ theta + noise`` with noise covariance ``r``."""

    h: np.ndarray
    r: np.ndarray
    noise: NoiseKind = NoiseKind.GAUSSIAN
    _chol: np.ndarray = field(init=False, repr=False, compare=False)
    _r_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=float))
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        if r.shape != (h.shape[0], h.shape[0]):
            raise ValueError(f"noise covariance shape {r.shape} does not match {h.shape[0]} observations")
        if not np.allclose(r, r.T):
            raise ValueError("noise covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(r)
        except np.linalg.LinAlgError:
            raise ValueError("noise covariance must be positive definite") from None
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "noise", NoiseKind(self.noise))
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_r_inv", np.linalg.inv(r))

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def r_inv(self) -> np.ndarray:
        return self._r_inv

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    def information(self) -> np.ndarray:
        """``H^T R^{-1} H``."""
        return self.h.T @ self._r_inv @ self.h

    def to_dict(self) -> dict:
        return {"h": self.h.tolist(), "r": self.r.tolist(), "noise": self.noise.value}

    @classmethod
    def from_dict(cls, d: dict) -> "SensingModel":
        return cls(np.array(d["h"], dtype=float), np.array(d["r"], dtype=float), NoiseKind(d.get("noise", "gaussian")))


@dataclass(frozen=True)
class NetworkModel:
    sensing: tuple[SensingModel, ...]
    interests: tuple[InterestSet, ...]
    graph_process: LaplacianProcess
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).ravel()
        n = self.graph_process.n
        object.__setattr__(self, "sensing", tuple(self.sensing))
        object.__setattr__(self, "interests", tuple(self.interests))
        object.__setattr__(self, "theta", theta)
        if theta.shape != (n,):
            raise ValueError(f"field parameter has {theta.size} entries for {n} agents")
        if len(self.sensing) != n or len(self.interests) != n:
            raise ValueError("need one sensing model and one interest set per agent")
        for k, s in enumerate(self.sensing):
            if s.h.shape[1] != n:
                raise ValueError(f"agent {k + 1}: sensing matrix has {s.h.shape[1]} columns, expected {n}")
        for k, s in enumerate(self.interests):
            if s.indices[-1] >= n:
                raise ValueError(f"agent {k + 1}: interest set exceeds [1, {n}]")

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def graph(self) -> Graph:
        return self.graph_process.base

    def masks(self) -> np.ndarray:
        return np.array([s.mask(self.n) for s in self.interests])

    def projected_information(self) -> np.ndarray:
        """``sum_n P_n H_n^T R_n^{-1} H_n P_n`` (N x N)."""
        out = np.zeros((self.n, self.n))
        for s, mask in zip(self.sensing, self.masks()):
            out += mask[:, None] * s.information() * mask[None, :]
        return out

    def with_interests(self, interests) -> "NetworkModel":
        return NetworkModel(self.sensing, tuple(interests), self.graph_process, self.theta)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta.tolist(),
            "graph": self.graph.to_dict(),
            "edge_probability": self.graph_process.p,
            "graph_seed": self.graph_process.seed,
            "agents": [
                {**s.to_dict(), "interest": i.to_list()}
                for s, i in zip(self.sensing, self.interests)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkModel":
        proc = LaplacianProcess(
            Graph.from_dict(d["graph"]), float(d.get("edge_probability", 1.0)), int(d.get("graph_seed", 0))
        )
        agents = d["agents"]
        return cls(
            tuple(SensingModel.from_dict(a) for a in agents),
            tuple(InterestSet.from_list(a["interest"]) for a in agents),
            proc,
            np.array(d["theta"], dtype=float),
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "NetworkModel":
        return cls.from_dict(json.loads(text))


def physical_coupling(h) -> frozenset[int]:
    """Components whose column in ``h`` has a non-negligible entry."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    return frozenset(int(j) for j in np.flatnonzero(np.any(np.abs(h) > COUPLING_TOL, axis=0)))


@dataclass(frozen=True)
class ObservabilityReport:
    gram: np.ndarray
    full_rank: bool
    eigenvalues: np.ndarray


def check_global_observability(models) -> ObservabilityReport:
    """Whether ``sum_n H_n^T R_n^{-1} H_n`` is invertible (relative eigenvalue test)."""
    gram = sum(m.information() for m in models)
    gram = 0.5 * (gram + gram.T)
    eig = np.linalg.eigvalsh(gram)
    full = bool(eig[-1] > 0 and eig[0] > RANK_RTOL * eig[-1])
    return ObservabilityReport(gram, full, eig)


def check_interest_consistency(model: NetworkModel) -> bool:
    return all(
        physical_coupling(s.h) <= set(i.indices) for s, i in zip(model.sensing, model.interests)
    )


def interested_agents(interests, component: int) -> list[int]:
    return [n for n, s in enumerate(interests) if component in s]


@dataclass(frozen=True)
class ComponentConnectivity:
    component: int
    agents: tuple[int, ...]
    subgraph: Graph
    connected: bool


@dataclass(frozen=True)
class StructuralReport:
    components: tuple[ComponentConnectivity, ...]

    @property
    def passed(self) -> bool:
        return all(c.connected for c in self.components)

    @property
    def failing(self) -> list[int]:
        return [c.component for c in self.components if not c.connected]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failing_components": [r + 1 for r in self.failing],
            "components": [
                {
                    "component": c.component + 1,
                    "agents": [a + 1 for a in c.agents],
                    "edges": [[c.agents[i] + 1, c.agents[j] + 1] for i, j in c.subgraph.edges],
                    "connected": c.connected,
                }
                for c in self.components
            ],
        }


def check_structural_observability(model: NetworkModel) -> StructuralReport:
    """Connectivity of the mean graph induced on the agents interested in each component.

    Connectivity of every induced subgraph is sufficient (not necessary) for
    the Lyapunov-type condition checked by :func:`verify_a5`.
    """
    mean_lap = model.graph_process.mean_laplacian()
    n = model.n
    mean_graph = Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n) if mean_lap[i, j] != 0))
    out = []
    for r in range(n):
        agents = interested_agents(model.interests, r)
        if not agents:
            raise EmptyInterestError(f"no agent is interested in component {r + 1}")
        sub, _ = induced_subgraph(mean_graph, agents)
        out.append(ComponentConnectivity(r, tuple(agents), sub, is_connected_spectral(laplacian(sub))))
    return StructuralReport(tuple(out))


@dataclass(frozen=True)
class A5Result:
    c1: float
    holds: bool


def lyapunov_matrix(model: NetworkModel, beta0: float, a: float) -> np.ndarray:
    """``(beta0/a) * mean L_P + P G_H R^{-1} G_H^T P`` restricted to the S_P coordinates."""
    n = model.n
    lp = build_censored_laplacian(model.graph_process.mean_laplacian(), model.interests).dense()
    info = np.zeros((n * n, n * n))
    for k, (s, mask) in enumerate(zip(model.sensing, model.masks())):
        info[k * n:(k + 1) * n, k * n:(k + 1) * n] = mask[:, None] * s.information() * mask[None, :]
    keep = np.flatnonzero(network_projector(model.interests, n))
    b = (beta0 / a) * lp + info
    return b[np.ix_(keep, keep)]


def verify_a5(model: NetworkModel, beta0: float, a: float) -> A5Result:
    if a <= 0 or beta0 <= 0:
        raise ValueError("gains must be positive")
    b = lyapunov_matrix(model, beta0, a)
    c1 = float(np.linalg.eigvalsh(0.5 * (b + b.T))[0])
    return A5Result(c1, c1 > A5_TOL)


def min_valid_gain(model: NetworkModel, beta0: float, c1: float) -> float:
    """Smallest ``a`` with ``a * min(lambda_min(S), c1, 1/beta0) >= 1``.

    ``S`` is the projected information matrix. ``c1`` itself depends on ``a``
    through :func:`verify_a5`; see :func:`smallest_admissible_gain` for the
    self-consistent value.
    """
    lam = float(np.linalg.eigvalsh(model.projected_information())[0])
    if lam <= A5_TOL:
        raise GainError(f"projected information matrix is singular (lambda_min={lam:.3g})")
    if c1 <= 0:
        raise GainError(f"Lyapunov constant c1={c1:.3g} is not positive")
    return 1.0 / min(lam, c1, 1.0 / beta0)


def smallest_admissible_gain(model: NetworkModel, beta0: float, rtol: float = 1e-6) -> float:
    """Smallest ``a`` for which the gain condition holds with ``c1`` evaluated at ``a``.

    ``a * c1(a)`` is nondecreasing in ``a``, so the admissible set is a
    half-line and bisection finds its left end.
    """

    def ok(a):
        res = verify_a5(model, beta0, a)
        return res.holds and a * min(lam, res.c1, 1.0 / beta0) >= 1.0

    lam = float(np.linalg.eigvalsh(model.projected_information())[0])
    if lam <= A5_TOL:
        raise GainError(f"projected information matrix is singular (lambda_min={lam:.3g})")
    hi = max(1.0 / lam, beta0)
    for _ in range(60):
        if ok(hi):
            break
        hi *= 2.0
    else:
        raise GainError("gain condition fails for every tried gain; the Lyapunov condition does not hold")
    lo = hi / 2.0
    while lo > 0 and ok(lo):
        hi, lo = lo, lo / 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def schedule_gain_condition(model: NetworkModel, schedule) -> dict:
    """Lyapunov and gain conditions for a concrete schedule.

    ``c1`` uses the ratio of the schedule's first consensus and innovation
    weights, ``beta(0) / alpha(0)``. That ratio bounds ``beta_t / alpha_t``
    from below for every ``t``; without an offset it equals ``beta0 / a``.
    """
    a5 = verify_a5(model, schedule.beta(0), schedule.alpha(0))
    lam = float(np.linalg.eigvalsh(model.projected_information())[0])
    terms = {"lambda_min": lam, "c1": a5.c1, "inv_beta0": 1.0 / schedule.beta0}
    worst = min(terms.values())
    return {
        "a5_holds": a5.holds,
        "c1": a5.c1,
        "terms": terms,
        "a6_holds": bool(a5.holds and schedule.a * worst >= 1.0 - 1e-12),
        "min_valid_gain": (1.0 / worst) if worst > 0 else math.inf,
    }


def generate_observation(model: SensingModel, theta, rng: np.random.Generator) -> np.ndarray:
    return model.h @ np.asarray(theta, dtype=float) + model.chol @ standard_noise(rng, model.noise, model.m)


def standard_noise(rng: np.random.Generator, kind: NoiseKind, size) -> np.ndarray:
    """Zero-mean, unit-variance i.i.d. draws of the requested kind."""
    if kind is NoiseKind.GAUSSIAN:
        return rng.standard_normal(size)
    return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)
