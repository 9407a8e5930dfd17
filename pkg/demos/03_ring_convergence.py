# %% [markdown]
# # Convergence on the ten-node ring
#
# Each agent observes a weighted sum of five neighbouring components and
# tracks exactly those five. Errors shrink like 1/sqrt(t) once the start-up
# transient has passed.

# %%
import sys

import numpy as np

from cirfe.analysis import mse_decay_slope
from cirfe.montecarlo import run_monte_carlo
from cirfe.scenarios import builtin_scenario

quick = "--full" not in sys.argv
cfg = builtin_scenario("ring10", trials=10 if quick else 50, horizon=20_000 if quick else 100_000)
res = run_monte_carlo(cfg)
print(f"{cfg.trials} trials x {cfg.horizon} steps in {res.wall_time:.1f}s")

# %%
for t in (0, 100, 1000, 10_000, cfg.horizon):
    i = np.searchsorted(res.times, t)
    print(f"t={int(res.times[i]):>6}  worst agent error {res.agent_error[i].max():.4f}")

# %% [markdown]
# On log-log axes the network MSE follows a line of slope close to -1.

# %%
print("slope over [1e3, horizon]:", round(mse_decay_slope(res.times, res.network_mse, (1e3, cfg.horizon)), 3))
