"""Ranked weighted Chinese restaurant sampler with importance weights.

Customers are seated one at a time.  Given ranked tables ``D_1..D_k`` the
next customer with observation ``y`` either joins table ``j`` with score
``p_j * pred_j(y)`` or opens a new table at rank ``j`` with score
``q_j * m0(y)``, where ``pred_j`` is the block posterior predictive and
``m0`` the prior marginal.  The sum of the scores is the one-step predictive
``l(n)``; the draw's importance weight is ``L(m) = prod_i l(i - 1)``, and
self-normalised averages of ``h(m) L(m)`` estimate posterior expectations.

With the unit kernel every score is a transition probability, so each draw
is an exact sample from the prior ordered-partition law.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .eppf import WEIGHT_SUM_TOL, log_prob_ordered, log_transition_weights, prediction_weights
from .errors import NumericalError
from .kernels import BlockStatistics, ConjugateKernel
from .levy import LevyIntensity
from .partitions import OrderedPartition, Partition

__all__ = [
    "SeatingState",
    "SISDraw",
    "Estimate",
    "DensityEstimate",
    "seat_next",
    "seating_probabilities",
    "run_sis",
    "estimate",
    "predictive_density",
    "density_estimate",
    "stick_breaking_sample",
    "replicate_rng",
    "check_draw",
    "ESS_WARN_FRACTION",
]

ESS_WARN_FRACTION = 0.01
STICK_REMAINDER_TOL = 1e-12
STICK_CAP = 10_000


@dataclass(frozen=True)
class SeatingState:
    """Ranked tables of the customers seated so far.

    ``log_l`` accumulates ``log l(i-1)`` over seated customers and
    ``log_prior`` the log transition weights of the choices made, so that
    ``log_prior`` ends up equal to ``log pi(m)``.  ``log_q`` is the log
    probability with which the sampler produced this configuration.
    """

    blocks: tuple[tuple[int, ...], ...] = ()
    stats: tuple[BlockStatistics, ...] = ()
    log_l: float = 0.0
    log_prior: float = 0.0
    log_q: float = 0.0

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def partition(self) -> OrderedPartition:
        return OrderedPartition._trusted(self.blocks)


@dataclass(frozen=True)
class SISDraw:
    partition: OrderedPartition
    log_weight: float
    log_proposal: float = field(default=float("nan"), compare=False)
    log_prior: float = field(default=float("nan"), compare=False)


class Estimate(NamedTuple):
    value: float | np.ndarray
    ess: float
    stderr: float | np.ndarray


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    stderr: np.ndarray | None
    ess: float
    n_draws: int
    warnings: tuple[str, ...] = ()


@lru_cache(maxsize=65536)
def _weights_for(rho: LevyIntensity, sizes: tuple[int, ...]):
    log_join, log_new = log_transition_weights(sizes, rho)
    total = math.fsum(map(math.exp, log_join)) + math.fsum(map(math.exp, log_new))
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise NumericalError(f"prediction weights sum to {total!r} for sizes {sizes}")
    return log_join, log_new


def _seat_scores(state: SeatingState, y: float, rho, kernel: ConjugateKernel) -> list[float]:
    log_join, log_new = _weights_for(rho, state.sizes)
    scores = [lw + kernel.log_predictive(st, y) for lw, st in zip(log_join, state.stats)]
    new_term = kernel.log_prior_predictive(y)
    scores.extend(lw + new_term for lw in log_new)
    return scores


def seating_probabilities(
    state: SeatingState, y: float, rho: LevyIntensity, kernel: ConjugateKernel
) -> tuple[list[float], float]:
    """Normalised seating probabilities and ``log l(n)`` for observation ``y``.

    The list holds the join options for ranks ``1..k`` followed by the
    new-table options for ranks ``1..k+1``.
    """
    scores = _seat_scores(state, y, rho, kernel)
    top = max(scores)
    if not math.isfinite(top):
        raise NumericalError(f"all seating scores vanish for y={y!r}")
    probs = [math.exp(s - top) for s in scores]
    total = math.fsum(probs)
    return [p / total for p in probs], top + math.log(total)


def seat_next(
    state: SeatingState,
    y: float,
    rho: LevyIntensity,
    kernel: ConjugateKernel,
    rng: np.random.Generator | float,
) -> SeatingState:
    """Seat one more customer; ``rng`` may also be a pre-drawn uniform in [0, 1)."""
    probs, log_total = seating_probabilities(state, y, rho, kernel)
    u = rng if isinstance(rng, float) else float(rng.random())
    choice = len(probs) - 1
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            choice = i
            break

    k = len(state.blocks)
    item = state.n + 1
    log_join, log_new = _weights_for(rho, state.sizes)
    blocks = list(state.blocks)
    stats = list(state.stats)
    if choice < k:
        blocks[choice] = blocks[choice] + (item,)
        stats[choice] = stats[choice].add(y)
        prior_term = log_join[choice]
    else:
        j = choice - k
        blocks.insert(j, (item,))
        stats.insert(j, BlockStatistics().add(y))
        prior_term = log_new[j]
    return SeatingState(
        blocks=tuple(blocks),
        stats=tuple(stats),
        log_l=state.log_l + log_total,
        log_prior=state.log_prior + prior_term,
        log_q=state.log_q + math.log(probs[choice]),
    )


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream for replicate ``replicate`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replicate,))))


def _one_draw(data, rho, kernel, rng) -> SISDraw:
    state = SeatingState()
    for y, u in zip(data, rng.random(len(data)).tolist()):
        state = seat_next(state, y, rho, kernel, u)
    return SISDraw(state.partition, state.log_l, state.log_q, state.log_prior)


def check_draw(draw: SISDraw, data: Sequence[float], rho, kernel, rtol: float = 1e-10) -> None:
    """Verify the per-draw identities; raises :class:`NumericalError` on failure.

    * the product of transition weights equals ``pi(m)`` (to 1e-12)
    * ``L(m) q(m) = pi(m) * prod_j m0(D_j)`` (to ``rtol``)
    """
    m = draw.partition
    log_pi = log_prob_ordered(m, rho)
    if abs(math.expm1(draw.log_prior - log_pi)) > 1e-12:
        raise NumericalError(f"transition product {draw.log_prior} != log pi(m) {log_pi} for {m}")
    log_marg = sum(
        kernel.log_marginal(BlockStatistics.from_values(data[i - 1] for i in block))
        for block in m.blocks
    )
    lhs = draw.log_weight + draw.log_proposal
    if abs(math.expm1(lhs - log_pi - log_marg)) > rtol:
        raise NumericalError(f"weight identity fails for {m}: {lhs} vs {log_pi + log_marg}")


def _run_chunk(args) -> list[SISDraw]:
    data, rho, kernel, seed, start, stop, validate = args
    out = []
    for b in range(start, stop):
        draw = _one_draw(data, rho, kernel, replicate_rng(seed, b))
        if validate:
            check_draw(draw, data, rho, kernel)
        out.append(draw)
    return out


def run_sis(
    data: Sequence[float],
    rho: LevyIntensity,
    kernel: ConjugateKernel,
    replicates: int,
    seed: int = 0,
    *,
    workers: int | None = None,
    validate: bool = False,
) -> list[SISDraw]:
    """``replicates`` independent SIS draws.

    Replicate ``b`` uses :func:`replicate_rng` ``(seed, b)``, so results do
    not depend on ``workers``.  ``validate`` runs :func:`check_draw` on every
    draw (slow; for tests).
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    data = [float(y) for y in data]
    if not data:
        raise ValueError("data must be nonempty")
    workers = workers or 1
    if workers == 1:
        return _run_chunk((data, rho, kernel, seed, 0, replicates, validate))
    bounds = np.linspace(0, replicates, workers + 1).astype(int)
    jobs = [
        (data, rho, kernel, seed, int(lo), int(hi), validate)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_run_chunk, jobs))
    return [d for chunk in chunks for d in chunk]


def default_workers() -> int:
    env = os.environ.get("NTR_MIX_THREADS")
    if env:
        return max(1, int(env))
    return 1


def estimate(
    draws: Sequence[SISDraw], h: Callable[[OrderedPartition], float | np.ndarray]
) -> Estimate:
    """Self-normalised importance-sampling average of ``h`` over the draws.

    ``h`` may return arrays; it is evaluated once per distinct partition.
    ``stderr`` is the delta-method standard error
    ``sqrt(sum w_b^2 (h_b - est)^2) / sum w_b``.
    """
    if not draws:
        raise ValueError("need at least one draw")
    log_w = np.array([d.log_weight for d in draws])
    w = np.exp(log_w - log_w.max())
    # aggregate weights per distinct partition
    groups: dict[Hashable, list[float]] = {}
    for d, wb in zip(draws, w.tolist()):
        g = groups.get(d.partition)
        if g is None:
            groups[d.partition] = [wb, wb * wb]
        else:
            g[0] += wb
            g[1] += wb * wb
    parts = list(groups)
    gw = [groups[m][0] for m in parts]
    gw2 = [groups[m][1] for m in parts]
    sw = math.fsum(gw)
    sw2 = math.fsum(gw2)
    vals = np.array([np.asarray(h(m), dtype=float) for m in parts])
    flat = vals.reshape(len(parts), -1)
    # correctly rounded sums, so h == 1 gives exactly 1
    est = np.array([math.fsum(c) for c in (flat * np.array(gw)[:, None]).T]) / sw
    var = np.array([math.fsum(c) for c in ((flat - est) ** 2 * np.array(gw2)[:, None]).T]) / sw**2
    if vals.ndim == 1:
        est, var = float(est[0]), float(var[0])
    else:
        est, var = est.reshape(vals.shape[1:]), var.reshape(vals.shape[1:])
    return Estimate(est, sw * sw / sw2, np.sqrt(var))


def _block_stats(m: OrderedPartition, data: Sequence[float]) -> list[BlockStatistics]:
    return [BlockStatistics.from_values(data[i - 1] for i in block) for block in m.blocks]


def predictive_density(
    m: OrderedPartition | SeatingState,
    data: Sequence[float],
    y_grid,
    rho: LevyIntensity,
    kernel: ConjugateKernel,
) -> np.ndarray:
    """Density of the next observation given ranked partition ``m`` of ``data``.

    ``sum_j q_j * m0(y) + sum_j p_j * pred_j(y)``.
    """
    if isinstance(m, SeatingState):
        stats = list(m.stats)
        m = m.partition
    else:
        stats = _block_stats(m, data)
    grid = np.asarray(y_grid, dtype=float)
    w = prediction_weights(m, rho)
    out = math.fsum(w.new) * np.exp(kernel.log_prior_predictive(grid))
    for pj, st in zip(w.join, stats):
        out = out + pj * np.exp(kernel.log_predictive(st, grid))
    return out


def density_estimate(
    draws: Sequence[SISDraw],
    data: Sequence[float],
    y_grid,
    rho: LevyIntensity,
    kernel: ConjugateKernel,
) -> DensityEstimate:
    grid = np.asarray(y_grid, dtype=float)
    data = [float(y) for y in data]
    est = estimate(draws, lambda m: predictive_density(m, data, grid, rho, kernel))
    notes = []
    if est.ess / len(draws) < ESS_WARN_FRACTION:
        notes.append(
            f"effective sample size {est.ess:.1f} is below {ESS_WARN_FRACTION:.0%} of {len(draws)} draws"
        )
    return DensityEstimate(grid, est.value, est.stderr, est.ess, len(draws), tuple(notes))


def stick_breaking_sample(
    alpha: float, theta: float, n: int, rng: np.random.Generator
) -> Partition:
    """Partition of ``n`` iid draws from a PD(alpha, theta) stick-breaking measure.

    Sticks ``W_k ~ Beta(1 - alpha, theta + k alpha)`` are broken lazily, only
    as far as the uniforms require.  Once the unbroken remainder drops below
    ``STICK_REMAINDER_TOL`` or ``STICK_CAP`` atoms exist, a uniform landing in
    the remainder is given a fresh atom of its own.
    """
    if not (0.0 <= alpha < 1.0) or not theta > 0:
        raise ValueError(f"need 0 <= alpha < 1 and theta > 0, got ({alpha}, {theta})")
    cum: list[float] = []  # cumulative stick masses
    remainder = 1.0
    labels = []
    fresh = 0
    for u in rng.random(n).tolist():
        while (not cum or u >= cum[-1]) and remainder >= STICK_REMAINDER_TOL and len(cum) < STICK_CAP:
            k = len(cum) + 1
            w = rng.beta(1.0 - alpha, theta + k * alpha)
            piece = remainder * w
            remainder -= piece
            cum.append((cum[-1] if cum else 0.0) + piece)
        if cum and u < cum[-1]:
            labels.append(int(np.searchsorted(cum, u, side="right")))
        else:
            fresh += 1
            labels.append(-fresh)
    blocks: dict[int, list[int]] = {}
    for item, lab in enumerate(labels, start=1):
        blocks.setdefault(lab, []).append(item)
    return Partition(blocks.values())

