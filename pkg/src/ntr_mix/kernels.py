"""Conjugate kernel / base-measure pairs.

A kernel supplies, for a block of observations summarised by its sufficient
statistics, the log marginal ``log ∫ prod_i K(y_i | x) H(dx)`` and the log
posterior predictive ``log ∫ K(y | x) pi(dx | block)``.  Two kernels ship:

* :class:`NormalNormal` -- ``K(y|x) = N(y; x, kernel_variance)``,
  ``H = N(0, prior_variance)``.
* :class:`UnitKernel` -- ``K ≡ 1``; every integral is one, so posterior
  computations collapse onto the prior partition law.

The Normal formulas follow from standard conjugacy.  The block marginal of
``d`` observations is multivariate normal with covariance
``s I + A 11'``, whose determinant is ``s^(d-1) (s + d A)`` and whose
quadratic form is ``(Σy² - A S² / (s + d A)) / s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "BlockStatistics",
    "ConjugateKernel",
    "NormalNormal",
    "UnitKernel",
    "MIN_KERNEL_VARIANCE",
    "log_block_marginal",
    "log_block_predictive",
    "posterior_params",
]

MIN_KERNEL_VARIANCE = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BlockStatistics:
    """Count, sum and sum of squares of the observations in one block."""

    count: int = 0
    sum_y: float = 0.0
    sum_sq: float = 0.0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.count == 0 and (self.sum_y != 0.0 or self.sum_sq != 0.0):
            raise ValueError("an empty block has zero sums")

    @classmethod
    def from_values(cls, ys: Iterable[float]) -> "BlockStatistics":
        ys = [float(y) for y in ys]
        return cls(len(ys), math.fsum(ys), math.fsum(y * y for y in ys))

    def add(self, y: float) -> "BlockStatistics":
        return BlockStatistics(self.count + 1, self.sum_y + y, self.sum_sq + y * y)


class ConjugateKernel:
    """Interface for kernels with closed-form block integrals."""

    def log_marginal(self, stats: BlockStatistics) -> float:
        raise NotImplementedError

    def log_predictive(self, stats: BlockStatistics, y):
        raise NotImplementedError

    def log_prior_predictive(self, y):
        return self.log_predictive(BlockStatistics(), y)

    def sample_posterior(self, stats: BlockStatistics, rng: np.random.Generator) -> float:
        raise NotImplementedError(f"{type(self).__name__} has no atom posterior")


@dataclass(frozen=True)
class UnitKernel(ConjugateKernel):
    """``K ≡ 1``; used for exact sampling from the prior partition law."""

    def log_marginal(self, stats):
        return 0.0

    def log_predictive(self, stats, y):
        return np.zeros_like(y, dtype=float) if np.ndim(y) else 0.0


@dataclass(frozen=True)
class NormalNormal(ConjugateKernel):
    """Normal location kernel with a centred Normal base measure."""

    kernel_variance: float = 1.0
    prior_variance: float = 1.0

    def __post_init__(self):
        if not self.kernel_variance >= MIN_KERNEL_VARIANCE:
            raise ValueError(
                f"kernel_variance must be >= {MIN_KERNEL_VARIANCE}, got {self.kernel_variance}"
            )
        if not self.prior_variance > 0:
            raise ValueError(f"prior_variance must be positive, got {self.prior_variance}")

    def posterior_params(self, stats: BlockStatistics) -> tuple[float, float]:
        """Mean and variance of the atom given the block.

        ``1/var = d/s + 1/A`` and ``mean = var * sum_y / s``.
        """
        if stats.count < 1:
            raise ValueError("posterior_params needs a nonempty block")
        s = self.kernel_variance
        var = 1.0 / (stats.count / s + 1.0 / self.prior_variance)
        return var / s * stats.sum_y, var

    def log_marginal(self, stats):
        d = stats.count
        if d == 0:
            return 0.0
        s, a = self.kernel_variance, self.prior_variance
        big = s + d * a
        quad = (stats.sum_sq - a * stats.sum_y**2 / big) / s
        logdet = (d - 1) * math.log(s) + math.log(big)
        return -0.5 * (d * _LOG_2PI + logdet + quad)

    def log_predictive(self, stats, y):
        """``log N(y; mean, s + var)`` for the block posterior; empty block gives the prior."""
        if stats.count == 0:
            mean, var = 0.0, self.prior_variance
        else:
            mean, var = self.posterior_params(stats)
        tot = self.kernel_variance + var
        if np.ndim(y):
            return -0.5 * (_LOG_2PI + math.log(tot) + (np.asarray(y, dtype=float) - mean) ** 2 / tot)
        return -0.5 * (_LOG_2PI + math.log(tot) + (y - mean) ** 2 / tot)

    def sample_posterior(self, stats, rng):
        mean, var = self.posterior_params(stats)
        return float(rng.normal(mean, math.sqrt(var)))


def log_block_marginal(kernel: ConjugateKernel, stats: BlockStatistics) -> float:
    return kernel.log_marginal(stats)


def log_block_predictive(kernel: ConjugateKernel, stats: BlockStatistics, y_new):
    if stats.count < 1:
        raise ValueError("predictive needs a nonempty block; use log_block_marginal for new blocks")
    return kernel.log_predictive(stats, y_new)


def posterior_params(kernel: NormalNormal, stats: BlockStatistics) -> tuple[float, float]:
    return kernel.posterior_params(stats)
