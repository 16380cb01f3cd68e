"""Neutral-to-the-right species sampling mixtures.

Exact ordered-partition laws from homogeneous Lévy intensities, a ranked
weighted Chinese restaurant importance sampler, and conjugate Normal density
estimation checked against brute-force enumeration.
"""
from .eppf import (
    PredictionWeights,
    log_ewens,
    log_prob_ordered,
    log_prob_partition,
    prediction_weights,
)
from .errors import CapExceeded, NumericalError
from .kernels import BlockStatistics, NormalNormal, UnitKernel
from .levy import GenericTail, HomogeneousBeta, LevyIntensity, PoissonDirichlet, kappa, pd_tail, phi
from .oracle import (
    PosteriorTable,
    exact_partition_posterior,
    exact_posterior,
    exact_predictive_density,
)
from .partitions import OrderedPartition, Partition, enumerate_ordered, forget_order, orderings_of
from .sis import (
    DensityEstimate,
    Estimate,
    SeatingState,
    SISDraw,
    density_estimate,
    estimate,
    predictive_density,
    run_sis,
    seat_next,
    stick_breaking_sample,
)

__version__ = "0.1.0"
