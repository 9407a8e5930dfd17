# %% [markdown]
# # How much noise is left, and how sharing a component helps
#
# The scaled error sqrt(t+1) (x_t - theta) settles to a Gaussian. For one
# agent measuring its own scalar with unit noise and gain a, the variance is
# a^2 / (2a - 1).

# %%
import numpy as np

from cirfe.analysis import (
    asymptotic_covariance,
    displayed_uniform_covariance,
    empirical_scaled_covariance,
    uniform_interest_covariance,
)
from cirfe.censor import InterestSet
from cirfe.estimator import WeightSchedule
from cirfe.graph import LaplacianProcess, path_graph
from cirfe.montecarlo import run_monte_carlo
from cirfe.scenarios import ScenarioConfig, ring10_model
from cirfe.sensing import NetworkModel, SensingModel

scalar = NetworkModel((SensingModel(np.eye(1), np.eye(1)),), (InterestSet((0,)),),
                      LaplacianProcess(path_graph(1)), np.array([0.7]))
horizon = 20_000
res = run_monte_carlo(ScenarioConfig("scalar", scalar, WeightSchedule(a=2.0), trials=2000, horizon=horizon))
emp = empirical_scaled_covariance(res.final_states, scalar.theta, scalar.masks(), horizon)
print("theory", asymptotic_covariance(scalar, 2.0).s_r[0, 0], "| Monte Carlo", emp.pooled[0])

# %% [markdown]
# When every component is tracked by the same number of agents q there is a
# closed form. It matches the general construction; the other variant that
# circulates for this case does not, and the scalar run above arbitrates.

# %%
ring = ring10_model()
print("ring, a=60: closed form vs general:",
      np.abs(uniform_interest_covariance(ring, 60.0, 5) - asymptotic_covariance(ring, 60.0).s_r).max())
print("scalar, a=2: other variant gives", displayed_uniform_covariance(scalar, 2.0, 1)[0, 0])

# %% [markdown]
# Two agents watching the same pair of components halve the variance
# compared with one agent per component.

# %%
eye = np.eye(4)
graph = LaplacianProcess(path_graph(4))
pairs = NetworkModel(tuple(SensingModel(eye[[0, 1]] if k < 2 else eye[[2, 3]], np.eye(2)) for k in range(4)),
                     tuple(InterestSet((0, 1)) if k < 2 else InterestSet((2, 3)) for k in range(4)),
                     graph, np.zeros(4))
alone = NetworkModel(tuple(SensingModel(eye[[k]], np.eye(1)) for k in range(4)),
                     tuple(InterestSet((k,)) for k in range(4)), graph, np.zeros(4))
print("theory ratio:", np.diag(asymptotic_covariance(pairs, 2.0).s_r) / np.diag(asymptotic_covariance(alone, 2.0).s_r))
