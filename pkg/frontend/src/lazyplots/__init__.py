"""Figures from benchmark convergence-trace CSV files.

Input files follow the trace schema emitted by the solver harness:
leading ``# key=value`` metadata comments, then a header line

    iter,wall_time_s,grad_evals,jac_evals,factorizations,linear_solves,metric,value

with one row per (iteration, metric) pair.  This package reads only that
schema; it has no dependency on the solver package itself.
"""

from .plots import (
    Curve,
    FigureSpec,
    MetricMissingError,
    PlotError,
    dump_data,
    extract_curves,
    plot_traces,
    read_trace,
)

__all__ = [
    "Curve",
    "FigureSpec",
    "MetricMissingError",
    "PlotError",
    "dump_data",
    "extract_curves",
    "plot_traces",
    "read_trace",
]
