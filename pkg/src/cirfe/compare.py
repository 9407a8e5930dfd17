"""Side-by-side error curves for several estimators on one model under common random numbers."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from cirfe.estimator import EstimatorKind
from cirfe.montecarlo import RunResult, run_monte_carlo
from cirfe.scenarios import ScenarioConfig


def owner_agent(config: ScenarioConfig, component: int) -> int:
    """Agent that reads out ``component``: the agent with the same index if it is interested, else the first one that is."""
    interests = config.model.interests
    if component in interests[component]:
        return component
    return next(k for k, s in enumerate(interests) if component in s)


def distant_agent(config: ScenarioConfig, component: int) -> int:
    """Agent farthest in hops from the lowest-indexed agent observing ``component`` (ties: lowest index)."""
    model = config.model
    observers = [k for k, s in enumerate(model.sensing) if np.any(np.abs(s.h[:, component]) > 1e-12)]
    if not observers:
        raise ValueError(f"component {component + 1} is observed by no agent")
    dist = model.graph.hop_distances(observers[0])
    return int(np.argmax(dist))


@dataclass
class Comparison:
    times: np.ndarray
    components: tuple[int, ...]
    curves: dict[str, np.ndarray]       # label -> (T, len(components)) RMS error
    agents: dict[str, tuple[int, ...]]  # label -> readout agent per component
    runs: dict[str, RunResult]

    def final(self, label: str) -> np.ndarray:
        return self.curves[label][-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "component", "estimator", "agent", "rmse"])
        for label, curve in self.curves.items():
            for i, t in enumerate(self.times):
                for c, comp in enumerate(self.components):
                    w.writerow([int(t), comp + 1, label, self.agents[label][c] + 1, repr(float(curve[i, c]))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "components": [c + 1 for c in self.components],
            "final_rmse": {k: v[-1].tolist() for k, v in self.curves.items()},
            "agents": {k: [a + 1 for a in v] for k, v in self.agents.items()},
        }


def compare_estimators(configs, components, **run_kw) -> Comparison:
    """Run every config and read out per-component RMS errors.

    Each config reads out at the component's owner agent. Classical runs also
    get a ``classical-d`` curve read at the agent farthest from the component's
    first observer.
    """
    configs = list(configs)
    ref = configs[0].model
    for c in configs[1:]:
        if c.model is not ref and c.model.to_dict() != ref.to_dict():
            raise ValueError("all configs must share one model")
        if (c.seed, c.trials, c.horizon) != (configs[0].seed, configs[0].trials, configs[0].horizon):
            raise ValueError("configs must share seed, trials and horizon for common random numbers")
    components = tuple(int(c) for c in components)
    curves, agents, runs = {}, {}, {}
    times = None
    for cfg in configs:
        res = run_monte_carlo(cfg, **run_kw)
        times = res.times
        label = cfg.estimator.value
        if label in runs:
            label = f"{label}#{len(runs)}"
        runs[label] = res
        own = tuple(owner_agent(cfg, r) for r in components)
        curves[label] = np.stack([res.component_rmse(a, r) for a, r in zip(own, components)], axis=1)
        agents[label] = own
        if cfg.estimator is EstimatorKind.CLASSICAL:
            far = tuple(distant_agent(cfg, r) for r in components)
            curves["classical-d"] = np.stack([res.component_rmse(a, r) for a, r in zip(far, components)], axis=1)
            agents["classical-d"] = far
    return Comparison(times, components, curves, agents, runs)
