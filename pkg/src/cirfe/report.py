"""JSON reports combining model checks with run statistics."""
from __future__ import annotations

import math

import numpy as np

from cirfe.analysis import CovarianceError, asymptotic_covariance, empirical_scaled_covariance, mse_decay_slope
from cirfe.graph import EmptyInterestError, algebraic_connectivity
from cirfe.montecarlo import RunResult, gain_condition
from cirfe.sensing import (
    NetworkModel,
    check_global_observability,
    check_interest_consistency,
    check_structural_observability,
    physical_coupling,
)


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def model_checks(model: NetworkModel, schedule=None) -> dict:
    obs = check_global_observability(model.sensing)
    try:
        structural = check_structural_observability(model).to_dict()
    except EmptyInterestError as exc:
        structural = {"passed": False, "error": str(exc)}
    out = {
        "mean_graph_lambda2": algebraic_connectivity(model.graph_process.mean_laplacian()),
        "global_observability": {"full_rank": obs.full_rank, "eigenvalues": obs.eigenvalues},
        "interest_consistency": check_interest_consistency(model),
        "physical_coupling": [[j + 1 for j in sorted(physical_coupling(s.h))] for s in model.sensing],
        "structural_observability": structural,
    }
    if schedule is not None:
        out["schedule"] = schedule.to_dict()
        out["gain_condition"] = gain_condition(model, schedule)
    out["passed"] = bool(
        obs.full_rank and out["interest_consistency"] and structural.get("passed", False)
        and (schedule is None or out["gain_condition"]["a6_holds"])
    )
    return _clean(out)


def run_report(result: RunResult, include_checks: bool = True) -> dict:
    cfg = result.config
    rep = {"metadata": {k: v for k, v in result.metadata.items() if k != "wall_time"}}
    if include_checks:
        rep["checks"] = model_checks(cfg.model, cfg.schedule)
    rep["times"] = result.times
    rep["agent_error"] = result.agent_error
    rep["network_mse"] = result.network_mse
    try:
        rep["mse_slope"] = mse_decay_slope(result.times, result.network_mse)
    except ValueError:
        rep["mse_slope"] = None
    try:
        cov = asymptotic_covariance(cfg.model, cfg.schedule.a)
        rep["asymptotic_covariance"] = cov.s_r
    except (CovarianceError, EmptyInterestError) as exc:
        rep["asymptotic_covariance"] = None
        rep["asymptotic_covariance_error"] = str(exc)
    if cfg.trials >= 100:
        masks = np.ones((cfg.model.n, cfg.model.n)) if cfg.estimator.value == "classical" else cfg.model.masks()
        emp = empirical_scaled_covariance(result.final_states, cfg.model.theta, masks, cfg.horizon)
        rep["empirical_variances"] = {"per_entry": emp.per_entry, "pooled": emp.pooled}
    return _clean(rep)
