import json

import numpy as np
import pytest

from cirfe.compare import compare_estimators, distant_agent, owner_agent
from cirfe.censor import InterestSet
from cirfe.estimator import EstimatorKind, WeightSchedule
from cirfe.montecarlo import ModelCheckError, log_times, run_monte_carlo
from cirfe.report import model_checks, run_report
from cirfe.scenarios import ScenarioConfig, builtin_names, builtin_scenario, load_scenario
from cirfe.sensing import GainError, check_structural_observability


def test_builtin_models():
    ring = builtin_scenario("ring10").model
    assert ring.sensing[0].h.ravel().tolist() == [1.0, 1.2, 1.3, 0, 0, 0, 0, 0, 1.4, 1.5]
    assert all(len(s) == 5 for s in ring.interests)
    assert np.array_equal(ring.graph_process.mean_laplacian(), ring.graph_process.sample_laplacian(5))
    line10 = builtin_scenario("line10").model
    assert line10.interests[0].to_list() == [1, 2] and line10.interests[9].to_list() == [9, 10]
    line30 = builtin_scenario("line30").model
    sizes = [len(s) for s in line30.interests]
    assert sizes[:2] == [3, 4] and sizes[-2:] == [4, 3] and set(sizes[2:-2]) == {5}
    bad = check_structural_observability(builtin_scenario("fivenode_bad").model)
    assert bad.failing == [0]
    with pytest.raises(KeyError):
        builtin_scenario("torus")
    assert set(builtin_names()) == {"ring10", "line10", "line30", "fivenode", "fivenode_bad"}


def test_builtin_checks_pass():
    for name in ("ring10", "line10", "line30", "fivenode"):
        cfg = builtin_scenario(name)
        rep = model_checks(cfg.model, cfg.schedule)
        assert rep["passed"], name
    rep = model_checks(builtin_scenario("fivenode_bad").model)
    assert not rep["passed"] and rep["structural_observability"]["failing_components"] == [1]


def test_log_times():
    t = log_times(100)
    assert t[0] == 0 and t[-1] == 100
    assert t[:5].tolist() == [0, 1, 2, 3, 4]
    assert np.all(np.diff(t) > 0)
    assert 10 in t and 32 in t   # ceil(10^(12/8)) = 32


def test_noiseless_truth_start_has_zero_error():
    cfg = builtin_scenario("fivenode", trials=1, horizon=1, init="truth", noise_scale=0.0)
    res = run_monte_carlo(cfg)
    assert np.all(res.agent_error == 0)


def test_determinism_and_batch_invariance():
    cfg = builtin_scenario("ring10", trials=6, horizon=300, seed=11)
    a = run_monte_carlo(cfg)
    b = run_monte_carlo(cfg)
    c = run_monte_carlo(cfg, batch_size=1)
    assert a.errors_csv() == b.errors_csv()
    assert json.dumps(run_report(a)) == json.dumps(run_report(b))
    assert np.array_equal(a.final_states, c.final_states)
    assert np.allclose(a.agent_error, c.agent_error, rtol=1e-14, atol=0)
    other = run_monte_carlo(cfg.with_(seed=12))
    assert not np.array_equal(a.final_states, other.final_states)


def test_trial_streams_are_independent_of_trial_count():
    cfg = builtin_scenario("fivenode", trials=3, horizon=200, seed=5)
    few = run_monte_carlo(cfg)
    more = run_monte_carlo(cfg.with_(trials=7))
    assert np.array_equal(few.final_states, more.final_states[:3])


def test_random_graph_and_laplace_noise_run():
    cfg = builtin_scenario("fivenode", trials=4, horizon=500)
    model = cfg.model
    from cirfe.graph import LaplacianProcess
    from cirfe.sensing import NetworkModel, SensingModel

    sensing = tuple(SensingModel(s.h, s.r, "laplace") for s in model.sensing)
    rnd = NetworkModel(sensing, model.interests, LaplacianProcess(model.graph, 0.7, 1), model.theta)
    from cirfe.scenarios import default_schedule

    res = run_monte_carlo(cfg.with_(model=rnd, schedule=default_schedule(rnd)))
    assert res.agent_error[-1].max() < res.agent_error[0].max()


def test_preflight_errors():
    cfg = builtin_scenario("ring10", trials=1, horizon=10)
    ints = list(cfg.model.interests)
    ints[0] = InterestSet((0, 1))
    with pytest.raises(ModelCheckError):
        run_monte_carlo(cfg.with_(model=cfg.model.with_interests(ints)))
    with pytest.raises(GainError, match="min_valid_gain"):
        run_monte_carlo(cfg.with_(schedule=WeightSchedule(a=1.0)))
    # counterexample scenario still runs; its Lyapunov failure is only reported
    bad = run_monte_carlo(builtin_scenario("fivenode_bad", trials=2, horizon=50))
    assert not bad.gain_check["a5_holds"]


def test_config_json_round_trip(tmp_path):
    cfg = builtin_scenario("fivenode", trials=3, horizon=20, estimator="cirfe_identity_weight")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = load_scenario(str(path))
    assert back.to_dict() == cfg.to_dict() and back.digest() == cfg.digest()
    d = cfg.to_dict()
    del d["schedule"]
    d["rate"] = 1.0
    assert ScenarioConfig.from_dict(d).schedule == cfg.schedule
    with pytest.raises(KeyError):
        load_scenario(str(tmp_path / "missing.json"))


def test_compare_identical_and_mismatch():
    cfg = builtin_scenario("fivenode", trials=3, horizon=100)
    cmp = compare_estimators([cfg, cfg], [1, 3])
    labels = list(cmp.curves)
    assert np.array_equal(cmp.curves[labels[0]], cmp.curves[labels[1]])
    with pytest.raises(ValueError):
        compare_estimators([cfg, builtin_scenario("ring10", trials=3, horizon=100)], [0])
    with pytest.raises(ValueError):
        compare_estimators([cfg, cfg.with_(seed=9)], [0])


def test_readout_agents():
    line30 = builtin_scenario("line30")
    assert owner_agent(line30, 1) == 1
    assert distant_agent(line30, 1) == 29
    assert distant_agent(line30, 6) == 29
    fn = builtin_scenario("fivenode")
    assert owner_agent(fn, 1) == 1


def test_plugin_and_identity_runs_converge():
    for kind in (EstimatorKind.CIRFE_IDENTITY_WEIGHT, EstimatorKind.CIRFE_PLUGIN_COVARIANCE):
        res = run_monte_carlo(builtin_scenario("fivenode", trials=5, horizon=2000, estimator=kind))
        assert res.agent_error[-1].max() < 0.1


def test_report_contents():
    res = run_monte_carlo(builtin_scenario("ring10", trials=100, horizon=200))
    rep = run_report(res)
    json.dumps(rep, allow_nan=False)
    assert "wall_time" not in rep["metadata"]
    assert len(rep["asymptotic_covariance"]) == 10
    assert len(rep["empirical_variances"]["pooled"]) == 10
    assert res.trajectories is None
    with pytest.raises(ValueError):
        res.trajectory_csv()
