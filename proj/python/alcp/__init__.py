"""Augmented Lagrangian solver for state-constrained semilinear elliptic optimal control."""

from ._alcp import (
    AlConfig,
    AlReport,
    Benchmark,
    ComplementarityMode,
    ErrorReport,
    InnerFailPolicy,
    Mesh,
    al_cost,
    al_reduced_gradient,
    benchmark_names,
    disk_mesh,
    error_report,
    make_benchmark,
    outer_loop,
    rect_mesh,
    run,
    solve_state,
)

__all__ = [
    "AlConfig",
    "AlReport",
    "Benchmark",
    "ComplementarityMode",
    "ErrorReport",
    "InnerFailPolicy",
    "Mesh",
    "al_cost",
    "al_reduced_gradient",
    "benchmark_names",
    "disk_mesh",
    "error_report",
    "make_benchmark",
    "outer_loop",
    "rect_mesh",
    "run",
    "solve_state",
]
