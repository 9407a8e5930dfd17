"""Interest-set projections: censoring, lifting, restriction and the censored Laplacian.

Agent ``n`` keeps a vector of length ``|I_n|`` whose ``k``-th entry estimates
component ``I_n[k]`` (interest sets are stored sorted). Lifting embeds it in
R^N with zeros outside ``I_n``; stacking the lifted vectors of all agents gives
the N*N-dimensional network state used by the compact recursion.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InterestSet:
    """Sorted, non-empty set of component indices (0-based)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if not idx:
            raise ValueError("interest set must be non-empty")
        if idx[0] < 0:
            raise ValueError(f"negative component index in {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, component):
        k = bisect_left(self.indices, component)
        return k < len(self.indices) and self.indices[k] == component

    def __iter__(self):
        return iter(self.indices)

    def position(self, component: int) -> int:
        """Slot of ``component`` in the local vector; KeyError if absent."""
        k = bisect_left(self.indices, component)
        if k == len(self.indices) or self.indices[k] != component:
            raise KeyError(component)
        return k

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n)
        m[list(self.indices)] = 1.0
        return m

    def to_list(self) -> list[int]:
        """1-based indices, as used in config files."""
        return [i + 1 for i in self.indices]

    @classmethod
    def from_list(cls, items) -> "InterestSet":
        return cls(tuple(int(i) - 1 for i in items))


def full_interest(n: int) -> InterestSet:
    return InterestSet(tuple(range(n)))


def _check_len(x, interest, who):
    x = np.asarray(x, dtype=float)
    if x.shape != (len(interest),):
        raise ValueError(f"{who} estimate has shape {x.shape}, expected ({len(interest)},)")
    return x


def censor_received(x_l, interest_l: InterestSet, interest_n: InterestSet) -> np.ndarray:
    """Neighbor ``l``'s message as seen by agent ``n``.

    Entry ``j`` carries ``l``'s estimate of component ``I_n[j]`` when ``l`` is
    interested in it, otherwise zero.
    """
    x_l = _check_len(x_l, interest_l, "sender")
    out = np.zeros(len(interest_n))
    for j, comp in enumerate(interest_n):
        if comp in interest_l:
            out[j] = x_l[interest_l.position(comp)]
    return out


def censor_self(x_n, interest_n: InterestSet, interest_l: InterestSet) -> np.ndarray:
    """Agent ``n``'s own estimate with entries outside ``I_n & I_l`` zeroed."""
    x_n = _check_len(x_n, interest_n, "own")
    keep = np.array([comp in interest_l for comp in interest_n])
    return np.where(keep, x_n, 0.0)


def lift(z, interest: InterestSet, n: int) -> np.ndarray:
    z = _check_len(z, interest, "local")
    out = np.zeros(n)
    out[list(interest.indices)] = z
    return out


def restrict(z, interest: InterestSet) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return z[list(interest.indices)].copy()


def interest_masks(interests, n: int) -> np.ndarray:
    """0/1 matrix whose row ``n`` is the diagonal of the projector for agent ``n``."""
    return np.array([s.mask(n) for s in interests])


def network_projector(interests, n: int) -> np.ndarray:
    """Diagonal of the N*N block-diagonal projector, as a flat vector."""
    return interest_masks(interests, n).ravel()


def lift_all(estimates, interests, n: int) -> np.ndarray:
    """Stack lifted local estimates into an (N, N) array, one row per agent."""
    return np.array([lift(x, s, n) for x, s in zip(estimates, interests)])


def restrict_all(lifted: np.ndarray, interests) -> list[np.ndarray]:
    lifted = np.asarray(lifted).reshape(len(interests), -1)
    return [restrict(row, s) for row, s in zip(lifted, interests)]


class CensoredLaplacian:
    """Block-sparse N^2 x N^2 censored Laplacian.

    Every N x N block is diagonal, so a block is stored as its diagonal and only
    blocks on the graph's support (plus the diagonal blocks) are kept.
    """

    def __init__(self, n: int, blocks: dict[tuple[int, int], np.ndarray]):
        self.n = n
        self.blocks = blocks

    def dense(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n * n, n * n))
        for (a, b), d in self.blocks.items():
            out[a * n:(a + 1) * n, b * n:(b + 1) * n] = np.diag(d)
        return out

    def matvec(self, x) -> np.ndarray:
        """Apply to a stacked lifted state given flat (N*N,) or as (N, N)."""
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.reshape(self.n, self.n)
        out = np.zeros_like(x)
        for (a, b), d in self.blocks.items():
            out[a] += d * x[b]
        return out.reshape(shape)

    def __matmul__(self, x):
        return self.matvec(x)


def build_censored_laplacian(lap: np.ndarray, interests) -> CensoredLaplacian:
    """Censored Laplacian for one Laplacian realization.

    Off-diagonal block (n, l) is ``L[n, l] * P_l P_n``; diagonal block (n, n)
    is ``-P_n * sum_{r != n} L[n, r] P_r``.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    if len(interests) != n:
        raise ValueError(f"need {n} interest sets, got {len(interests)}")
    masks = interest_masks(interests, n)
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for a in range(n):
        diag = np.zeros(n)
        for b in range(n):
            if a == b or lap[a, b] == 0.0:
                continue
            blocks[(a, b)] = lap[a, b] * masks[b] * masks[a]
            diag -= lap[a, b] * masks[b]
        blocks[(a, a)] = masks[a] * diag
    return CensoredLaplacian(n, blocks)
