# %% [markdown]
# # Tracking less versus tracking everything
#
# The classical estimator makes every agent track the whole field. On the
# ring that is a small field and the classical agent wins: it pools more
# information per component. On a long line a far agent has to learn a
# component through many hops and CIRFE's local readout is better.

# %%
import sys

from cirfe.compare import compare_estimators
from cirfe.estimator import EstimatorKind
from cirfe.scenarios import builtin_scenario

quick = "--full" not in sys.argv
horizon = 5_000 if quick else 100_000
trials = 10 if quick else 100

ring = builtin_scenario("ring10", trials=trials, horizon=horizon)
cmp = compare_estimators([ring, ring.with_(estimator=EstimatorKind.CLASSICAL)], [0, 1, 2])
for label, final in ((k, cmp.final(k)) for k in cmp.curves):
    print(f"ring10 {label:>12}: {final.round(4)}")

# %%
line = builtin_scenario("line30", trials=trials, horizon=horizon)
cmp = compare_estimators([line, line.with_(estimator=EstimatorKind.CLASSICAL)], [1, 6])
for label in cmp.curves:
    agents = [a + 1 for a in cmp.agents[label]]
    print(f"line30 {label:>12} (agents {agents}): {cmp.final(label).round(4)}")
