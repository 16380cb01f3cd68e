"""Exact partition laws induced by a homogeneous Lévy intensity.

The ordered law has product form::

    pi(m) = prod_j kappa(d_j, r_{j-1}) / prod_j phi(r_j)

and the unordered EPPF sums it over the ``k!`` rank assignments of a
partition.  :func:`prediction_weights` gives the one-step transition
probabilities of the ranked restaurant: join rank ``j`` (``join[j-1]``) or
open a new singleton that becomes rank ``j`` (``new[j-1]``), shifting the
existing blocks of rank >= j down by one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import logsumexp

from .errors import CapExceeded, NumericalError
from .levy import LevyIntensity
from .partitions import OrderedPartition, Partition, orderings_of

__all__ = [
    "PredictionWeights",
    "log_prob_ordered",
    "log_prob_partition",
    "prediction_weights",
    "log_transition_weights",
    "log_ewens",
    "PERMUTATION_CAP",
    "WEIGHT_SUM_TOL",
]

PERMUTATION_CAP = 9
WEIGHT_SUM_TOL = 1e-8


@dataclass(frozen=True)
class PredictionWeights:
    log_join: tuple[float, ...]
    log_new: tuple[float, ...]

    @property
    def join(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_join)

    @property
    def new(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_new)

    def total(self) -> float:
        return math.fsum(self.join) + math.fsum(self.new)


def log_prob_ordered(m: OrderedPartition, rho: LevyIntensity) -> float:
    total = 0.0
    r_prev = 0
    for block in m.blocks:
        d = len(block)
        total += rho.log_kappa(d, r_prev) - rho.log_phi(r_prev + d)
        r_prev += d
    return total


def log_prob_partition(p: Partition, rho: LevyIntensity, cap: int = PERMUTATION_CAP) -> float:
    """EPPF: log-sum-exp of the ordered law over all rank assignments of ``p``."""
    if p.num_blocks > cap:
        raise CapExceeded(f"{p.num_blocks} blocks exceed the permutation cap {cap}")
    return float(logsumexp([log_prob_ordered(m, rho) for m in orderings_of(p)]))


def log_ewens(p: Partition, theta: float) -> float:
    """Ewens sampling formula ``θ^k Γ(θ) / Γ(θ+n) prod (n_j - 1)!`` in log space."""
    n = p.n
    out = p.num_blocks * math.log(theta) + math.lgamma(theta) - math.lgamma(theta + n)
    return out + sum(math.lgamma(s) for s in p.sizes)


def log_transition_weights(
    sizes: Sequence[int], rho: LevyIntensity
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Log join/new weights for ranked block sizes ``sizes`` (no sum check)."""
    k = len(sizes)
    lk = rho.log_kappa
    lp = rho.log_phi
    if k == 0:
        return (), (lk(1, 0) - lp(1),)
    r = [0] * (k + 1)
    for l, d in enumerate(sizes):
        r[l + 1] = r[l] + d

    # per block l: ratio when one extra item sits above it, and the phi ratio
    shift = [lk(sizes[l], r[l] + 1) - lk(sizes[l], r[l]) for l in range(k)]
    phi_ratio = [lp(r[l + 1]) - lp(r[l + 1] + 1) for l in range(k)]
    # suffix sums over l >= j (0-based); index k is the empty tail
    shift_tail = [0.0] * (k + 1)
    phi_tail = [0.0] * (k + 1)
    for l in range(k - 1, -1, -1):
        shift_tail[l] = shift_tail[l + 1] + shift[l]
        phi_tail[l] = phi_tail[l + 1] + phi_ratio[l]

    log_join = tuple(
        lk(sizes[j] + 1, r[j]) - lk(sizes[j], r[j]) + shift_tail[j + 1] + phi_tail[j]
        for j in range(k)
    )
    log_new = tuple(
        lk(1, r[j]) - lp(r[j] + 1) + shift_tail[j] + phi_tail[j] for j in range(k + 1)
    )
    return log_join, log_new


def prediction_weights(m: OrderedPartition, rho: LevyIntensity) -> PredictionWeights:
    """Transition probabilities for adding customer ``n + 1`` to ``m``.

    ``join[j-1]`` is the probability of joining block ``j``; ``new[j-1]``
    that of opening a new block at rank ``j`` for ``j = 1..k+1``.  Raises
    :class:`NumericalError` if the weights fail to sum to one within
    ``WEIGHT_SUM_TOL``.
    """
    weights = PredictionWeights(*log_transition_weights(m.sizes, rho))
    total = weights.total()
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise NumericalError(f"prediction weights sum to {total!r}, not 1, for {m!r}")
    return weights
