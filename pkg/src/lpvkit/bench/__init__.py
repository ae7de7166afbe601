"""Unbalanced-disc benchmark: data generation, LPV embedding and the identification study."""

from .disc import (
    UnbalancedDiscParams,
    add_noise_snr,
    as_schedule,
    embed_lpv,
    gen_multisine,
    scheduling_of,
    simulate_disc,
)
from .experiment import STRUCTURES, ExperimentConfig, ExperimentReport, bench_template, run_experiment

__all__ = [
    "STRUCTURES", "ExperimentConfig", "ExperimentReport", "UnbalancedDiscParams", "add_noise_snr",
    "as_schedule", "bench_template", "embed_lpv", "gen_multisine", "run_experiment", "scheduling_of",
    "simulate_disc",
]  # fmt: skip
