"""Brute-force posterior over every ordered partition of a small dataset.

The unnormalised posterior mass of ranked partition ``m`` is
``pi(m) * prod_j ∫ prod_{i in D_j} K(y_i | x) H(dx)``.  Enumerating all
``a(n)`` ordered partitions (545,835 at the default cap of n = 8) gives exact
posterior expectations against which the Monte Carlo sampler is checked.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy.special import logsumexp

from .eppf import log_prob_ordered
from .kernels import BlockStatistics, ConjugateKernel
from .levy import LevyIntensity
from .partitions import DEFAULT_ENUMERATION_CAP, OrderedPartition, Partition, enumerate_ordered
from .sis import predictive_density

__all__ = [
    "PosteriorTable",
    "exact_posterior",
    "exact_partition_posterior",
    "exact_predictive_density",
    "write_fixture",
    "read_fixture",
    "content_hash",
]


@dataclass(frozen=True)
class PosteriorTable:
    entries: tuple[tuple[OrderedPartition, float], ...]
    log_norm: float

    def probabilities(self) -> np.ndarray:
        return np.exp(np.array([lm for _, lm in self.entries]) - self.log_norm)

    def __len__(self) -> int:
        return len(self.entries)

    def expectation(self, h) -> Any:
        """Posterior mean of ``h(m)``."""
        probs = self.probabilities()
        total = None
        for (m, _), p in zip(self.entries, probs):
            term = p * np.asarray(h(m), dtype=float)
            total = term if total is None else total + term
        return total

    def block_count_distribution(self) -> dict[int, float]:
        dist: dict[int, float] = defaultdict(float)
        for (m, _), p in zip(self.entries, self.probabilities()):
            dist[m.num_blocks] += float(p)
        return dict(sorted(dist.items()))


def exact_posterior(
    data: Sequence[float],
    rho: LevyIntensity,
    kernel: ConjugateKernel,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> PosteriorTable:
    data = [float(y) for y in data]
    n = len(data)
    # block marginals depend only on the item set; many m share blocks
    marg_cache: dict[tuple[int, ...], float] = {}

    def log_marg(block):
        v = marg_cache.get(block)
        if v is None:
            v = kernel.log_marginal(BlockStatistics.from_values(data[i - 1] for i in block))
            marg_cache[block] = v
        return v

    entries = []
    for m in enumerate_ordered(n, cap=cap):
        lm = log_prob_ordered(m, rho) + sum(log_marg(b) for b in m.blocks)
        entries.append((m, lm))
    log_norm = float(logsumexp([lm for _, lm in entries]))
    return PosteriorTable(tuple(entries), log_norm)


def exact_partition_posterior(
    data: Sequence[float],
    rho: LevyIntensity,
    kernel: ConjugateKernel,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> dict[Partition, float]:
    """Posterior probabilities of unordered partitions (ordered table summed over rankings)."""
    table = exact_posterior(data, rho, kernel, cap=cap)
    grouped: dict[Partition, list[float]] = defaultdict(list)
    for m, lm in table.entries:
        grouped[Partition(m.blocks)].append(lm)
    return {p: math.exp(float(logsumexp(v)) - table.log_norm) for p, v in grouped.items()}


def exact_predictive_density(
    data: Sequence[float],
    rho: LevyIntensity,
    kernel: ConjugateKernel,
    y_grid,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> np.ndarray:
    grid = np.asarray(y_grid, dtype=float)
    data = [float(y) for y in data]
    if not data:
        return np.exp(kernel.log_prior_predictive(grid))
    table = exact_posterior(data, rho, kernel, cap=cap)
    return table.expectation(lambda m: predictive_density(m, data, grid, rho, kernel))


def content_hash(payload: bytes) -> str:
    """Git blob id of ``payload``."""
    return hashlib.sha1(b"blob %d\0" % len(payload) + payload).hexdigest()


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def write_fixture(path: str | Path, inputs: dict, values: dict) -> dict:
    """Write a regression fixture recording inputs, values and their content hash."""
    body = {"inputs": inputs, "values": values}
    doc = {"schema": "ntr-mix/1", "kind": "fixture", **body, "hash": content_hash(_canonical(body))}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def read_fixture(path: str | Path) -> dict:
    """Load a fixture and verify its hash; raises ``ValueError`` on mismatch."""
    doc = json.loads(Path(path).read_text())
    body = {"inputs": doc["inputs"], "values": doc["values"]}
    if content_hash(_canonical(body)) != doc["hash"]:
        raise ValueError(f"fixture {path} does not match its recorded hash")
    return doc
