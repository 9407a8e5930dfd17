import numpy as np
import pytest
from hypothesis import given, settings

from cirfe.censor import InterestSet, full_interest
from cirfe.graph import EmptyInterestError, LaplacianProcess, path_graph
from cirfe.sensing import (
    GainError,
    NetworkModel,
    NoiseKind,
    SensingModel,
    check_global_observability,
    check_interest_consistency,
    check_structural_observability,
    generate_observation,
    min_valid_gain,
    physical_coupling,
    schedule_gain_condition,
    smallest_admissible_gain,
    verify_a5,
)
from cirfe.estimator import WeightSchedule
from cirfe.scenarios import fivenode_model, line10_model, line30_model, ring10_model

from conftest import random_model, seeds


def scalar_model(h=1.0, r=1.0):
    return NetworkModel(
        (SensingModel(np.array([[h]]), np.array([[r]])),), (InterestSet((0,)),),
        LaplacianProcess(path_graph(1)), np.array([0.5]),
    )


def test_physical_coupling_examples():
    assert physical_coupling([[0, 1 / 3, 1 / 3, 1 / 3, 0]]) == {1, 2, 3}
    assert physical_coupling(np.zeros((2, 4))) == frozenset()
    assert physical_coupling(ring10_model().sensing[0].h) == {0, 1, 2, 8, 9}
    assert physical_coupling([[1e-13, 2e-12]]) == {1}


def test_global_observability_examples():
    assert check_global_observability(fivenode_model().sensing).full_rank
    assert check_global_observability(ring10_model().sensing).full_rank
    assert not check_global_observability([SensingModel(np.array([[1.0, 0.0]]), np.eye(1))]).full_rank


def test_gram_oracle():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        models = []
        for _ in range(int(rng.integers(1, 4))):
            m = int(rng.integers(1, 3))
            h = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.5)
            a = rng.normal(size=(m, m))
            models.append(SensingModel(h, a @ a.T + np.eye(m)))
        rep = check_global_observability(models)
        assert np.allclose(rep.gram, rep.gram.T)
        assert rep.eigenvalues[0] >= -1e-10
        stacked = np.vstack([np.linalg.cholesky(np.linalg.inv(s.r)).T @ s.h for s in models])
        assert rep.full_rank == (np.linalg.matrix_rank(stacked) == n)


def test_interest_consistency_examples():
    model = ring10_model()
    assert check_interest_consistency(model)
    assert check_interest_consistency(model.with_interests([full_interest(10)] * 10))
    shrunk = list(model.interests)
    shrunk[0] = InterestSet((0, 1))
    assert not check_interest_consistency(model.with_interests(shrunk))


def test_structural_observability_examples():
    bad = check_structural_observability(fivenode_model(bad=True))
    assert not bad.passed and bad.failing == [0]
    assert bad.components[0].agents == (0, 4) and bad.components[0].subgraph.edges == ()
    for model in (ring10_model(), line10_model(), line30_model(), fivenode_model()):
        assert check_structural_observability(model).passed
    ring = check_structural_observability(ring10_model())
    assert all(len(c.agents) == 5 and len(c.subgraph.edges) == 4 for c in ring.components)
    full = ring10_model().with_interests([full_interest(10)] * 10)
    assert check_structural_observability(full).passed


def test_structural_empty_component():
    model = fivenode_model()
    ints = list(model.interests)
    ints[0] = InterestSet((1,))
    with pytest.raises(EmptyInterestError):
        check_structural_observability(model.with_interests(ints))


def test_a5_examples():
    assert not verify_a5(fivenode_model(bad=True), 1.0, 1.0).holds
    assert verify_a5(ring10_model(), 1.0, 1.0).holds
    res = verify_a5(scalar_model(), 1.0, 1.0)
    assert res.c1 == pytest.approx(1.0) and res.holds


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_structural_implies_a5(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng, p=float(rng.uniform(0.2, 1.0)))
    assert check_global_observability(model.sensing).full_rank or True
    rep = check_structural_observability(model)
    assert rep.passed
    if check_global_observability(model.sensing).full_rank:
        beta0, a = float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 50))
        assert verify_a5(model, beta0, a).holds


def test_min_valid_gain_examples():
    assert min_valid_gain(scalar_model(), 1.0, 1.0) == pytest.approx(1.0)
    big = NetworkModel(
        (SensingModel(np.array([[10.0]]), np.eye(1)),), (InterestSet((0,)),),
        LaplacianProcess(path_graph(1)), np.zeros(1),
    )
    assert min_valid_gain(big, 5.0, 0.1) == pytest.approx(10.0)
    ring = ring10_model()
    a_star = min_valid_gain(ring, 1.0, verify_a5(ring, 1.0, 1.0).c1)
    assert np.isfinite(a_star) and a_star > 0
    with pytest.raises(GainError):
        min_valid_gain(ring, 1.0, 0.0)
    singular = NetworkModel(
        (SensingModel(np.array([[1.0, 0.0]]), np.eye(1)), SensingModel(np.array([[1.0, 0.0]]), np.eye(1))),
        (InterestSet((0, 1)), InterestSet((0, 1))), LaplacianProcess(path_graph(2)), np.zeros(2),
    )
    with pytest.raises(GainError, match="lambda_min"):
        min_valid_gain(singular, 1.0, 1.0)


def test_smallest_admissible_gain_is_left_end():
    # two agents each seeing both components: the information term is definite
    h = np.array([[1.0, 0.4], [0.2, 0.7]])
    model = NetworkModel(
        (SensingModel(h, np.eye(2)), SensingModel(0.5 * h, np.eye(2))),
        (full_interest(2), full_interest(2)), LaplacianProcess(path_graph(2)), np.zeros(2),
    )
    a = smallest_admissible_gain(model, 1.0)

    def ok(x):
        c1 = verify_a5(model, 1.0, x).c1
        return x * min(np.linalg.eigvalsh(model.projected_information())[0], c1, 1.0) >= 1.0

    assert ok(a) and not ok(a * (1 - 1e-4))


def test_literal_gain_condition_can_be_unsatisfiable():
    # with rank-one local information a * c1(a) saturates below 1 when beta0 = 1
    ring = ring10_model()
    prods = [a * verify_a5(ring, 1.0, a).c1 for a in (1.0, 10.0, 1e3, 1e5)]
    assert max(prods) < 0.01 and np.all(np.diff(prods) >= -1e-12)
    with pytest.raises(GainError):
        smallest_admissible_gain(ring, 1.0)


def test_schedule_gain_condition_without_offset_matches_literal_reading():
    model = fivenode_model()
    sched = WeightSchedule(a=20.0)
    cond = schedule_gain_condition(model, sched)
    assert cond["c1"] == verify_a5(model, 1.0, 20.0).c1


def test_observation_moments():
    rng = np.random.default_rng(0)
    h = np.array([[1.0, -2.0, 0.5]])
    s = SensingModel(h, np.eye(1))
    theta = np.array([0.3, 0.1, -1.0])
    draws = np.array([generate_observation(s, theta, rng) for _ in range(100_000)])
    assert abs((draws - h @ theta).mean()) < 3 / np.sqrt(100_000)
    a = np.array([[2.0, 0.3], [0.3, 0.5]])
    for kind in NoiseKind:
        s2 = SensingModel(np.ones((2, 3)), a, kind)
        pure = np.array([generate_observation(s2, np.zeros(3), rng) for _ in range(50_000)])
        assert np.allclose(np.cov(pure.T), a, rtol=0.05, atol=0.02)
    fn = fivenode_model()
    assert (fn.sensing[2].h @ fn.theta).item() == pytest.approx(fn.theta[1:4].mean())


def test_bad_noise_covariance():
    with pytest.raises(ValueError):
        SensingModel(np.ones((1, 2)), np.array([[-1.0]]))
    with pytest.raises(ValueError):
        SensingModel(np.ones((2, 2)), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_model_json_round_trip():
    model = fivenode_model(bad=True)
    back = NetworkModel.from_json(model.to_json())
    assert back.to_dict() == model.to_dict()
    assert model.to_dict()["agents"][4]["interest"] == [1, 5]
