"""Command-line front end: ``ntr-mix --data y.csv [options]``.

Modes:

* ``sis``          importance-sampling density estimate with MC standard errors
* ``exact``        enumeration over all ordered partitions (n <= 8)
* ``prior-sample`` exact draws from the prior partition law; histogram of
                   the number of blocks

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.  Output for a given configuration and seed is byte-for-byte
reproducible unless ``--report-time`` is passed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapExceeded, NumericalError
from .kernels import NormalNormal, UnitKernel
from .levy import HomogeneousBeta, LevyIntensity, PoissonDirichlet
from .oracle import exact_posterior, exact_predictive_density
from .partitions import DEFAULT_ENUMERATION_CAP
from .sis import default_workers, density_estimate, estimate, run_sis

log = logging.getLogger("ntr_mix")

SCHEMA = "ntr-mix/1"
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
AUTO_GRID_STEPS = 200


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    data: str | None
    model: str = "beta"
    theta: float = 1.0
    alpha: float | None = None
    kernel_var: float = 1.0
    prior_var: float = 1.0
    replicates: int = 10_000
    grid: tuple[float, float, int] | None = None
    seed: int = 0
    mode: str = "sis"
    output: str | None = None
    format: str = "json"
    n: int | None = None
    report_time: bool = False

    def validate(self) -> None:
        if self.model not in ("beta", "pd"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.mode not in ("sis", "exact", "prior-sample"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.model == "beta" and self.alpha is not None:
            raise ConfigError("--alpha only applies to --model pd")
        if self.alpha is not None and not (0.0 <= self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        for name in ("theta", "kernel_var", "prior_var"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.grid is not None:
            lo, hi, steps = self.grid
            if not lo < hi or steps < 2:
                raise ConfigError(f"grid needs min < max and steps >= 2, got {self.grid}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.data is None and not (self.mode == "prior-sample" and self.n):
            raise ConfigError("--data is required (prior-sample also accepts --n)")
        if self.n is not None and self.n < 1:
            raise ConfigError("--n must be positive")

    def intensity(self) -> LevyIntensity:
        if self.model == "beta":
            return HomogeneousBeta(self.theta)
        return PoissonDirichlet(self.alpha or 0.0, self.theta)

    def kernel(self) -> NormalNormal:
        return NormalNormal(self.kernel_var, self.prior_var)


def ingest(path: str | Path) -> list[float]:
    """One observation per line; a non-numeric first line is taken as a header."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    values: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            y = float(line)
        except ValueError:
            if lineno == 1:
                continue
            raise DataError(f"{path}: line {lineno}: not a number: {line!r}") from None
        if not math.isfinite(y):
            raise DataError(f"{path}: line {lineno}: non-finite value {line!r}")
        values.append(y)
    if not values:
        raise DataError(f"{path}: no observations")
    return values


def parse_grid(text: str) -> tuple[float, float, int] | None:
    if text == "auto":
        return None
    try:
        lo, hi, steps = text.split(":")
        return float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be min:max:steps or auto, got {text!r}")


def auto_grid(data: Sequence[float]) -> tuple[float, float, int]:
    sd = float(np.std(data, ddof=1)) if len(data) > 1 else 0.0
    if not sd > 0:
        sd = 1.0
    return min(data) - 3 * sd, max(data) + 3 * sd, AUTO_GRID_STEPS


def run(config: RunConfig) -> dict:
    """Execute one configured run and return the output document."""
    config.validate()
    started = time.perf_counter()
    if config.data is not None:
        data = ingest(config.data)
    else:
        data = [0.0] * int(config.n)
    rho = config.intensity()
    kernel = config.kernel()
    lo, hi, steps = config.grid or auto_grid(data)
    grid = np.linspace(lo, hi, steps)

    doc: dict = {
        "schema": SCHEMA,
        "config": _config_echo(config, (lo, hi, steps)),
        "n": len(data),
        "seed": config.seed,
    }
    if config.mode == "exact":
        if len(data) > DEFAULT_ENUMERATION_CAP:
            raise ConfigError(
                f"exact mode enumerates all ordered partitions; n={len(data)} exceeds cap "
                f"{DEFAULT_ENUMERATION_CAP}"
            )
        table = exact_posterior(data, rho, kernel)
        dens = exact_predictive_density(data, rho, kernel, grid)
        doc["grid"] = [{"point": float(x), "estimate": float(f)} for x, f in zip(grid, dens)]
        doc["blocks"] = [
            {"k": k, "probability": p} for k, p in table.block_count_distribution().items()
        ]
        doc["ess"] = None
        doc["diagnostics"] = {"warnings": []}
    elif config.mode == "sis":
        draws = run_sis(data, rho, kernel, config.replicates, config.seed, workers=default_workers())
        de = density_estimate(draws, data, grid, rho, kernel)
        doc["grid"] = [
            {"point": float(x), "estimate": float(f), "stderr": float(s)}
            for x, f, s in zip(grid, de.density, de.stderr)
        ]
        ks = range(1, len(data) + 1)
        est = estimate(draws, lambda m: [float(m.num_blocks == k) for k in ks])
        doc["blocks"] = [
            {"k": k, "probability": float(p), "stderr": float(s)}
            for k, p, s in zip(ks, est.value, est.stderr)
            if p > 0
        ]
        doc["ess"] = de.ess
        doc["diagnostics"] = {"warnings": list(de.warnings)}
    else:
        draws = run_sis(
            data, rho, UnitKernel(), config.replicates, config.seed, workers=default_workers()
        )
        counts = Counter(d.partition.num_blocks for d in draws)
        b = config.replicates
        doc["blocks"] = [
            {
                "k": k,
                "count": counts[k],
                "probability": counts[k] / b,
                "stderr": math.sqrt(counts[k] / b * (1 - counts[k] / b) / b),
            }
            for k in sorted(counts)
        ]
        doc["ess"] = float(b)
        doc["diagnostics"] = {"warnings": []}
    for row in doc.get("grid", []):
        if not (math.isfinite(row["estimate"]) and row["estimate"] >= 0):
            raise NumericalError(f"invalid density value at {row['point']}: {row['estimate']}")
    if config.report_time:
        doc["wall_time"] = time.perf_counter() - started
    log.info("finished %s run in %.3fs", config.mode, time.perf_counter() - started)
    return doc


def _config_echo(config: RunConfig, grid) -> dict:
    echo = asdict(config)
    echo["grid"] = {"min": grid[0], "max": grid[1], "steps": grid[2]}
    echo.pop("report_time")
    echo.pop("output")
    return echo


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "grid" in doc:
        has_se = any("stderr" in row for row in doc["grid"])
        writer.writerow(["point", "estimate", "stderr"] if has_se else ["point", "estimate"])
        for row in doc["grid"]:
            vals = [row["point"], row["estimate"]] + ([row["stderr"]] if has_se else [])
            writer.writerow([repr(v) for v in vals])
    else:
        writer.writerow(["k", "count", "probability", "stderr"])
        for row in doc["blocks"]:
            writer.writerow([row["k"], row["count"], repr(row["probability"]), repr(row["stderr"])])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntr-mix",
        description="Density estimation with NTR species sampling mixtures of Normals.",
        epilog=(
            "Environment: NTR_MIX_THREADS caps the number of worker processes used "
            "for SIS replicates (default 1). Results do not depend on it."
        ),
    )
    parser.add_argument("--data", help="observations, one per line; optional header row")
    parser.add_argument("--model", choices=["beta", "pd"], default="beta",
                        help="intensity: homogeneous beta or Poisson-Dirichlet (default beta)")
    parser.add_argument("--theta", type=float, default=1.0, help="intensity parameter theta > 0")
    parser.add_argument("--alpha", type=float, default=None,
                        help="Poisson-Dirichlet discount in [0, 1) (pd only; default 0)")
    parser.add_argument("--kernel-var", type=float, default=1.0, help="Normal kernel variance")
    parser.add_argument("--prior-var", type=float, default=1.0,
                        help="variance A of the centred Normal base measure")
    parser.add_argument("--replicates", type=int, default=10_000, help="number of SIS draws B")
    parser.add_argument("--grid", type=parse_grid, default=None,
                        help="min:max:steps, or auto (data range +- 3 sd, 200 points)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=["sis", "exact", "prior-sample"], default="sis")
    parser.add_argument("--n", type=int, default=None,
                        help="prior-sample only: number of items when no --data is given")
    parser.add_argument("--output", help="write here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--report-time", action="store_true",
                        help="add wall_time to the JSON document (breaks byte reproducibility)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = RunConfig(
        data=args.data,
        model=args.model,
        theta=args.theta,
        alpha=args.alpha,
        kernel_var=args.kernel_var,
        prior_var=args.prior_var,
        replicates=args.replicates,
        grid=args.grid,
        seed=args.seed,
        mode=args.mode,
        output=args.output,
        format=args.format,
        n=args.n,
        report_time=args.report_time,
    )
    try:
        doc = run(config)
    except (ConfigError, CapExceeded) as exc:
        print(f"ntr-mix: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"ntr-mix: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"ntr-mix: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # parameter checks raised by the model classes
        print(f"ntr-mix: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(doc, config.format)
    if config.output:
        Path(config.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
