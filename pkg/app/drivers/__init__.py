# app/drivers/__init__.py
from app.drivers.markov import (
    MarkovDriverSpec,
    markov_limit_correction,
    markov_limit_covariance,
    markov_limit_tensors,
    markov_split,
    simulate_chain,
    simulate_markov_driver,
    stationary_distribution,
)
from app.drivers.mollified import (
    MollifiedNoiseSpec,
    build_kernel,
    kernel_operator,
    limit_driver,
    mollified_split,
    simulate_mollified_noise,
    space_points,
    spatial_mollifier,
    white_noise_increments,
)
from app.drivers.paths import SamplePath, TimeGrid, from_increments, step_path
from app.drivers.qwiener import (
    QWienerSpec,
    correlated_wiener,
    linear_drift_path,
    qwiener_increments,
    simulate_qwiener,
)
from app.drivers.rng import COUPLED_STREAM, INDEPENDENT_STREAM, PROBE_STREAM, replicate_rng

__all__ = [
    "COUPLED_STREAM",
    "INDEPENDENT_STREAM",
    "MarkovDriverSpec",
    "MollifiedNoiseSpec",
    "PROBE_STREAM",
    "QWienerSpec",
    "SamplePath",
    "TimeGrid",
    "build_kernel",
    "correlated_wiener",
    "from_increments",
    "kernel_operator",
    "limit_driver",
    "linear_drift_path",
    "markov_limit_correction",
    "markov_limit_covariance",
    "markov_limit_tensors",
    "markov_split",
    "mollified_split",
    "qwiener_increments",
    "replicate_rng",
    "simulate_chain",
    "simulate_markov_driver",
    "simulate_mollified_noise",
    "simulate_qwiener",
    "space_points",
    "spatial_mollifier",
    "stationary_distribution",
    "step_path",
    "white_noise_increments",
]
