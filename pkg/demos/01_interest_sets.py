# %% [markdown]
# # Interest sets, censoring and the censored Laplacian
#
# Five agents on a path. Agent 3 measures the average of components 2-4 and
# so has to track all three; the others only track their own component.

# %%
import numpy as np

from cirfe.censor import build_censored_laplacian, censor_received, censor_self, lift, restrict
from cirfe.graph import laplacian
from cirfe.scenarios import fivenode_model

model = fivenode_model()
for k, s in enumerate(model.interests):
    print(f"agent {k + 1}: interested in {s.to_list()}")

# %% [markdown]
# Agent 3 listens to agent 2. Agent 2 only knows component 2, so the message
# is padded with zeros, and agent 3 compares just the matching entry of its own estimate.

# %%
x2 = np.array([0.4])
x3 = np.array([0.1, 0.2, 0.3])
i2, i3 = model.interests[1], model.interests[2]
print("received :", censor_received(x2, i2, i3))
print("self     :", censor_self(x3, i3, i2))
print("lifted x3:", lift(x3, i3, model.n))
print("restrict theta to I_3:", restrict(model.theta, i3))

# %% [markdown]
# Stacking every agent's lifted estimate gives an N^2 vector. The censored
# Laplacian acts on it blockwise and never mixes components.

# %%
lp = build_censored_laplacian(laplacian(model.graph), model.interests).dense()
print("symmetric:", np.array_equal(lp, lp.T))
consensus = np.concatenate([lift(restrict(model.theta, s), s, model.n) for s in model.interests])
print("annihilates the lifted truth:", np.allclose(lp @ consensus, 0))
print("nonzero blocks:", sorted({(int(i) // 5 + 1, int(j) // 5 + 1) for i, j in zip(*np.nonzero(lp))}))
