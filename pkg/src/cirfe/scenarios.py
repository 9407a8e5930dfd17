"""Built-in network models and run configurations."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from cirfe.censor import InterestSet, build_censored_laplacian
from cirfe.estimator import EstimatorKind, WeightSchedule
from cirfe.graph import Graph, LaplacianProcess, path_graph, ring_graph
from cirfe.sensing import GainError, NetworkModel, SensingModel, schedule_gain_condition

RING10_THETA = (1.2, 1.3, 1.4, 0.8, 0.7, 1.1, 0.9, 1.0, 1.8, 0.6)
# coefficient on the component at offset d from the agent
RING_COEFFS = {0: 1.0, 1: 1.2, 2: 1.3, -2: 1.4, -1: 1.5}

DEFAULT_METRICS = ("agent_error", "network_mse")


def ring10_model() -> NetworkModel:
    n = 10
    base = np.array([1.0, 1.2, 1.3, 0, 0, 0, 0, 0, 1.4, 1.5])
    sensing = tuple(SensingModel(np.roll(base, k)[None, :], np.eye(1)) for k in range(n))
    interests = tuple(InterestSet(tuple((k + d) % n for d in range(-2, 3))) for k in range(n))
    return NetworkModel(sensing, interests, LaplacianProcess(ring_graph(n)), np.array(RING10_THETA))


def line_model(n: int, hops: int, theta) -> NetworkModel:
    """Path graph; agent k observes components within ``hops`` with the ring coefficients, truncated at the ends."""
    sensing, interests = [], []
    for k in range(n):
        h = np.zeros(n)
        for d in range(-hops, hops + 1):
            if 0 <= k + d < n:
                h[k + d] = RING_COEFFS[d]
        sensing.append(SensingModel(h[None, :], np.eye(1)))
        interests.append(InterestSet(tuple(j for j in range(n) if abs(j - k) <= hops)))
    return NetworkModel(tuple(sensing), tuple(interests), LaplacianProcess(path_graph(n)), np.asarray(theta, float))


def line10_model() -> NetworkModel:
    return line_model(10, 1, RING10_THETA)


def line30_model() -> NetworkModel:
    return line_model(30, 2, np.tile(RING10_THETA, 3))


def fivenode_model(bad: bool = False) -> NetworkModel:
    """Path 1-2-3-4-5; agent 3 sees the mean of components 2, 3, 4, the others their own.

    ``bad=True`` makes agent 5 also interested in component 1, which no agent
    on the path between 1 and 5 relays.
    """
    n = 5
    sensing = []
    for k in range(n):
        h = np.zeros(n)
        if k == 2:
            h[1:4] = 1.0 / 3.0
        else:
            h[k] = 1.0
        sensing.append(SensingModel(h[None, :], np.eye(1)))
    interests = [InterestSet((k,)) for k in range(n)]
    interests[2] = InterestSet((1, 2, 3))
    if bad:
        interests[4] = InterestSet((0, 4))
    theta = np.array([1.0, -0.5, 0.8, 1.5, -1.2])
    return NetworkModel(tuple(sensing), tuple(interests), LaplacianProcess(path_graph(n)), theta)


def _schedule_offset(a: float, beta0: float, delta1: float, curvature: float, lp_max: float) -> int:
    return max(math.ceil(a * curvature) - 1, math.ceil((beta0 * lp_max) ** (1.0 / delta1)) - 1, 0)


def default_schedule(model: NetworkModel, rate: float = 1.0, beta0: float = 1.0, delta1: float = 0.25,
                     margin: float = 1.05) -> WeightSchedule:
    """Gain and offset chosen from the model.

    ``a`` is the larger of the gain at which the slowest mode of the averaged
    recursion decays at ``rate`` (rates above 1/2 give a finite asymptotic
    covariance, larger rates shorten the transient) and ``margin`` times the
    smallest gain passing the gain condition for the resulting schedule. The
    offset keeps the first innovation and consensus steps contractive.
    """
    counts = np.zeros(model.n)
    for s in model.interests:
        counts[list(s.indices)] += 1
    q_half = np.diag(1.0 / np.sqrt(np.maximum(counts, 1)))
    slow = float(np.linalg.eigvalsh(q_half @ model.projected_information() @ q_half)[0])
    if slow <= 0:
        raise GainError("projected information matrix is singular; no gain makes this model converge")
    curvature = max(float(np.linalg.eigvalsh(s.information())[-1]) for s in model.sensing)
    lp = build_censored_laplacian(model.graph_process.mean_laplacian(), model.interests).dense()
    lp_max = max(float(np.linalg.eigvalsh(lp)[-1]), 0.0)

    def make(a):
        return WeightSchedule(a=a, beta0=beta0, delta1=delta1,
                              offset=_schedule_offset(a, beta0, delta1, curvature, lp_max))

    def ok(a):
        return schedule_gain_condition(model, make(a))["a6_holds"]

    a = rate / slow
    if not ok(a):
        hi = a
        for _ in range(80):
            hi *= 2.0
            if ok(hi):
                break
        else:
            # Lyapunov condition never met (e.g. a disconnected induced subgraph): keep the rate gain
            return make(a)
        lo = hi / 2.0
        while hi - lo > 1e-6 * hi:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if ok(mid) else (mid, hi)
        a = margin * hi
        while not ok(a):
            a *= margin
    return make(a)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: NetworkModel
    schedule: WeightSchedule
    trials: int = 1
    horizon: int = 1000
    seed: int = 0
    estimator: EstimatorKind = EstimatorKind.CIRFE
    outputs: tuple[str, ...] = DEFAULT_METRICS
    init: str = "zero"
    gamma0: float = 1.0
    noise_scale: float = 1.0   # 0 gives noiseless observations
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.trials < 1 or self.horizon < 1:
            raise ValueError("trials and horizon must be at least 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.init not in ("zero", "truth"):
            raise ValueError(f"unknown initialization {self.init!r}")
        object.__setattr__(self, "estimator", EstimatorKind(self.estimator))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "model": self.model.to_dict(),
            "schedule": self.schedule.to_dict(),
            "trials": self.trials,
            "horizon": self.horizon,
            "seed": self.seed,
            "estimator": self.estimator.value,
            "outputs": list(self.outputs),
            "init": self.init,
            "gamma0": self.gamma0,
            "noise_scale": self.noise_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        model = NetworkModel.from_dict(d["model"])
        schedule = (
            WeightSchedule.from_dict(d["schedule"]) if "schedule" in d
            else default_schedule(model, rate=float(d.get("rate", 1.0)))
        )
        return cls(
            name=d.get("name", "custom"),
            model=model,
            schedule=schedule,
            trials=int(d.get("trials", 1)),
            horizon=int(d.get("horizon", 1000)),
            seed=int(d.get("seed", 0)),
            estimator=EstimatorKind(d.get("estimator", "cirfe")),
            outputs=tuple(d.get("outputs", DEFAULT_METRICS)),
            init=d.get("init", "zero"),
            gamma0=float(d.get("gamma0", 1.0)),
            noise_scale=float(d.get("noise_scale", 1.0)),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# slowest-mode rate used for each built-in schedule
BUILTIN_RATES = {"ring10": 6.0, "line10": 1.0, "line30": 1.0, "fivenode": 1.0, "fivenode_bad": 1.0}

_MODELS = {
    "ring10": ring10_model,
    "line10": line10_model,
    "line30": line30_model,
    "fivenode": lambda: fivenode_model(False),
    "fivenode_bad": lambda: fivenode_model(True),
}


def builtin_names() -> list[str]:
    return list(_MODELS)


def builtin_scenario(name: str, **overrides) -> ScenarioConfig:
    if name not in _MODELS:
        raise KeyError(f"unknown scenario {name!r}; choose from {builtin_names()}")
    model = _MODELS[name]()
    cfg = ScenarioConfig(
        name=name,
        model=model,
        schedule=default_schedule(model, rate=BUILTIN_RATES[name]),
        trials=500,
        horizon=10_000,
        seed=0,
    )
    return cfg.with_(**overrides) if overrides else cfg


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Built-in name or path to a JSON config (see :meth:`ScenarioConfig.from_dict`)."""
    if name_or_path in _MODELS:
        return builtin_scenario(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise KeyError(f"{name_or_path!r} is neither a built-in scenario ({builtin_names()}) nor a file")
    return ScenarioConfig.from_dict(json.loads(path.read_text()))
