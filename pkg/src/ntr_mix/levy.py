"""Homogeneous Lévy intensities on (0, 1) and their moment functionals.

Every intensity is normalised so that ``∫ u rho(du) = 1``.  Two functionals
drive all partition probabilities downstream::

    kappa(d, r) = ∫ u**d (1 - u)**r rho(du)        d >= 1, r >= 0
    phi(n)      = ∫ (1 - (1 - u)**n) rho(du)       n >= 1

Values are produced in log space (``log_kappa``/``log_phi``) and memoised per
intensity instance; ``kappa``/``phi`` are thin exponentiating wrappers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from scipy import integrate
from scipy.special import betaln, gammaln

from .errors import NumericalError

__all__ = [
    "LevyIntensity",
    "HomogeneousBeta",
    "PoissonDirichlet",
    "GenericTail",
    "kappa",
    "phi",
    "log_kappa",
    "log_phi",
    "pd_tail",
]

QUAD_EPSREL = 1e-12


def _check_dr(d: int, r: int) -> None:
    if d < 1 or r < 0:
        raise ValueError(f"kappa needs d >= 1 and r >= 0, got d={d}, r={r}")


def _finite_log(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise NumericalError(f"{what} is not finite ({value!r}); check intensity parameters")
    return value


class LevyIntensity:
    """Base class; subclasses implement ``_log_kappa`` and ``_log_phi``."""

    def log_kappa(self, d: int, r: int) -> float:
        _check_dr(d, r)
        return _cached_log_kappa(self, d, r)

    def log_phi(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"phi needs n >= 1, got {n}")
        return _cached_log_phi(self, n)

    def kappa(self, d: int, r: int) -> float:
        return math.exp(self.log_kappa(d, r))

    def phi(self, n: int) -> float:
        return math.exp(self.log_phi(n))

    def _log_kappa(self, d: int, r: int) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def _log_phi(self, n: int) -> float:  # pragma: no cover - abstract
        raise NotImplementedError


@lru_cache(maxsize=None)
def _cached_log_kappa(rho: LevyIntensity, d: int, r: int) -> float:
    return _finite_log(rho._log_kappa(d, r), f"log kappa({d},{r}) for {rho!r}")


@lru_cache(maxsize=None)
def _cached_log_phi(rho: LevyIntensity, n: int) -> float:
    return _finite_log(rho._log_phi(n), f"log phi({n}) for {rho!r}")


@dataclass(frozen=True)
class HomogeneousBeta(LevyIntensity):
    """Beta-process intensity ``theta * u**-1 * (1 - u)**(theta - 1)``."""

    theta: float = 1.0

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive and finite, got {self.theta}")

    def _log_kappa(self, d, r):
        return math.log(self.theta) + float(betaln(d, r + self.theta))

    def phi_sum(self, n: int) -> float:
        """``sum_{l=1}^{n} theta / (theta + l - 1)``, accumulated left to right."""
        total = 0.0
        for l in range(1, n + 1):
            total += self.theta / (self.theta + l - 1)
        return total

    def phi(self, n: int) -> float:
        # the sum itself, not exp(log(sum)), so the value is exact to the last bit
        self.log_phi(n)
        return self.phi_sum(n)

    def _log_phi(self, n):
        return math.log(self.phi_sum(n))


@dataclass(frozen=True)
class PoissonDirichlet(LevyIntensity):
    """Intensity whose induced partition law is the two-parameter PD(alpha, theta).

    Its tail mass is ``c * u**-alpha * (1 - u)**theta`` with
    ``c = Γ(θ+2-α) / (Γ(1-α) Γ(1+θ))``.  Differentiating the tail gives the
    density ``c [α u^(-α-1) (1-u)^θ + θ u^(-α) (1-u)^(θ-1)]``, hence with
    ``a = d - α`` and ``b = r + θ``::

        kappa(d, r) = c * B(a, b) * (α b + θ a) / (a + b)
        phi(n)      = n * c * B(1 - α, n + θ)

    the latter from integrating ``n (1-u)^(n-1)`` against the tail.
    """

    alpha: float = 0.0
    theta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive and finite, got {self.theta}")

    @property
    def log_tail_const(self) -> float:
        a, t = self.alpha, self.theta
        return float(gammaln(t + 2 - a) - gammaln(1 - a) - gammaln(1 + t))

    def _log_kappa(self, d, r):
        a = d - self.alpha
        b = r + self.theta
        return (
            self.log_tail_const
            + float(betaln(a, b))
            + math.log(self.alpha * b + self.theta * a)
            - math.log(a + b)
        )

    def _log_phi(self, n):
        return math.log(n) + self.log_tail_const + float(betaln(1 - self.alpha, n + self.theta))

    def tail(self, u: float) -> float:
        return pd_tail(self.alpha, self.theta, u)


@dataclass(frozen=True)
class GenericTail(LevyIntensity):
    """Intensity given only through its tail mass ``T(u) = ∫_u^1 rho(dv)``.

    Moments are obtained by integrating by parts against the tail, e.g.
    ``phi(n) = ∫ n (1-u)^(n-1) T(u) du``, which stays bounded wherever ``T``
    is.  The tail must satisfy ``∫_0^1 T(u) du = 1`` (checked on
    construction).
    """

    tail: Callable[[float], float]
    name: str = field(default="generic", compare=False)

    def __post_init__(self):
        total = self.kappa(1, 0)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"tail is not normalised: integral of T(u) du = {total!r}")

    def _integrate(self, weight: Callable[[float], float]) -> float:
        def integrand(u):
            return weight(u) * self.tail(u)

        # A coarse pass over (0, 1) fixes the absolute scale for every piece.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            scale = abs(integrate.quad(integrand, 0.0, 1.0, epsrel=1e-6, limit=200)[0])
        epsabs = QUAD_EPSREL * scale
        pieces = [(0.0, 0.5), (0.5, 1.0)]
        total = err = 0.0
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            for lo, hi in pieces:
                value, abserr = integrate.quad(
                    integrand, lo, hi, epsabs=epsabs, epsrel=QUAD_EPSREL, limit=200
                )
                total += value
                err += abserr
        if caught and err > QUAD_EPSREL * abs(total):
            raise NumericalError(f"quadrature did not converge: {caught[0].message}")
        if not total > 0:
            raise NumericalError(f"non-positive moment integral {total!r}")
        return total

    def _log_kappa(self, d, r):
        # d/du [u^d (1-u)^r]
        def weight(u):
            val = d * u ** (d - 1) * (1.0 - u) ** r
            if r:
                val -= r * u**d * (1.0 - u) ** (r - 1)
            return val

        return math.log(self._integrate(weight))

    def _log_phi(self, n):
        return math.log(self._integrate(lambda u: n * (1.0 - u) ** (n - 1)))


def pd_tail(alpha: float, theta: float, u: float) -> float:
    """Tail mass ``∫_u^1 rho(dv)`` of the Poisson-Dirichlet intensity."""
    if not (0.0 <= alpha < 1.0) or not theta > 0:
        raise ValueError(f"need 0 <= alpha < 1 and theta > 0, got ({alpha}, {theta})")
    if not (0.0 < u <= 1.0):
        raise ValueError(f"u must lie in (0, 1], got {u}")
    if u == 1.0:
        return 0.0
    log_c = gammaln(theta + 2 - alpha) - gammaln(1 - alpha) - gammaln(1 + theta)
    return math.exp(log_c - alpha * math.log(u) + theta * math.log1p(-u))


def log_kappa(rho: LevyIntensity, d: int, r: int) -> float:
    return rho.log_kappa(d, r)


def log_phi(rho: LevyIntensity, n: int) -> float:
    return rho.log_phi(n)


def kappa(rho: LevyIntensity, d: int, r: int) -> float:
    """``∫ u**d (1-u)**r rho(du)``."""
    return rho.kappa(d, r)


def phi(rho: LevyIntensity, n: int) -> float:
    """``∫ (1 - (1-u)**n) rho(du)``."""
    return rho.phi(n)
