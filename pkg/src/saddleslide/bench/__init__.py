"""Benchmark harness: instance generators, baselines, runner, CLI."""

from .baselines import agd_joint_baseline, baseline_extragradient
from .generators import (
    Instance,
    gen_bilinear,
    gen_consensus,
    gen_linear_bilinear,
    gen_quadratic_spp,
    graph_laplacian,
    reference_solution,
    verify_instance,
)
from .runner import (
    CSV_COLUMNS,
    RunReport,
    determinism_digest,
    run_experiment,
    run_single,
    run_succeeded,
    write_csv,
)

__all__ = [
    "CSV_COLUMNS",
    "Instance",
    "RunReport",
    "agd_joint_baseline",
    "baseline_extragradient",
    "determinism_digest",
    "gen_bilinear",
    "gen_consensus",
    "gen_linear_bilinear",
    "gen_quadratic_spp",
    "graph_laplacian",
    "reference_solution",
    "run_experiment",
    "run_single",
    "run_succeeded",
    "verify_instance",
    "write_csv",
]
