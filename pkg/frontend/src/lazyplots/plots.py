"""Log-scale metric-versus-wall-time figures from trace CSV files."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CSV_HEADER = "iter,wall_time_s,grad_evals,jac_evals,factorizations,linear_solves,metric,value"

#: floor applied to nonpositive values before log-scale plotting; late-run
#: gap values can dip below zero by reference-value noise.
LOG_FLOOR = 1e-16


class PlotError(Exception):
    """Base class for figure-generation failures."""


class MetricMissingError(PlotError):
    """A requested metric does not appear in one of the input traces."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: the chosen metric of each input trace against wall time."""

    input_csv_paths: list
    metric: str
    y_log: bool = True
    title: Optional[str] = None
    output_path: str = "figure.png"


@dataclass(frozen=True)
class Curve:
    """The plotted series of a single trace: label plus (x, y) samples."""

    label: str
    times: tuple
    values: tuple
    source: str = ""


def read_trace(path) -> tuple[dict, list[dict]]:
    """Parse one trace CSV into (metadata, rows).

    Metadata comes from the leading ``# key=value`` comments; each row is a
    dict with ``iter`` (int), ``wall_time_s`` and ``value`` (float), the four
    counter columns (int) and ``metric`` (str).
    """
    metadata: dict[str, str] = {}
    rows: list[dict] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise PlotError(
                        f"{path}:{lineno}: unexpected header {line!r}; "
                        f"expected {CSV_HEADER!r}"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise PlotError(f"{path}:{lineno}: expected 8 fields, got {len(parts)}")
            rows.append(
                {
                    "iter": int(parts[0]),
                    "wall_time_s": float(parts[1]),
                    "grad_evals": int(parts[2]),
                    "jac_evals": int(parts[3]),
                    "factorizations": int(parts[4]),
                    "linear_solves": int(parts[5]),
                    "metric": parts[6],
                    "value": float(parts[7]),
                }
            )
    if not header_seen:
        raise PlotError(f"{path}: missing header line")
    return metadata, rows


def _label(metadata: dict, path) -> str:
    method = metadata.get("method")
    m = metadata.get("m")
    if method and m:
        return f"{method}-{m}"
    if method:
        return method
    return Path(path).stem


def extract_curves(spec: FigureSpec) -> list[Curve]:
    """Read every input CSV and pull out the chosen metric's series.

    Traces with no data rows are skipped with a warning; a trace that has
    data but lacks the metric raises :class:`MetricMissingError`.  Values are
    returned exactly as parsed (no log-floor clipping).
    """
    curves: list[Curve] = []
    for path in spec.input_csv_paths:
        metadata, rows = read_trace(path)
        if not rows:
            warnings.warn(f"{path}: trace has no data rows; skipping")
            continue
        picked = [r for r in rows if r["metric"] == spec.metric]
        if not picked:
            present = sorted({r["metric"] for r in rows})
            raise MetricMissingError(
                f"{path}: metric {spec.metric!r} not present "
                f"(available: {', '.join(present)})"
            )
        curves.append(
            Curve(
                label=_label(metadata, path),
                times=tuple(r["wall_time_s"] for r in picked),
                values=tuple(r["value"] for r in picked),
                source=str(path),
            )
        )
    return curves


def plot_traces(spec: FigureSpec) -> str:
    """Write the figure for ``spec`` and return its output path.

    One curve per input trace, x = wall-clock seconds, y = the chosen metric
    (log scale by default).  Nonpositive values on a log axis are clipped to
    ``LOG_FLOOR`` with a warning.  Output is deterministic: the same inputs
    produce a byte-identical image.
    """
    curves = extract_curves(spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
    try:
        for curve in curves:
            values = curve.values
            if spec.y_log and any(v <= 0.0 for v in values):
                warnings.warn(
                    f"{curve.source or curve.label}: nonpositive "
                    f"{spec.metric} values clipped to {LOG_FLOOR:g} for log scale"
                )
                values = tuple(max(v, LOG_FLOOR) for v in values)
            ax.plot(curve.times, values, label=curve.label)
        if spec.y_log:
            ax.set_yscale("log")
        ax.set_xlabel("running time (s)")
        ax.set_ylabel(spec.metric)
        if spec.title:
            ax.set_title(spec.title)
        if curves:
            ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.output_path, metadata=_deterministic_metadata(spec.output_path))
    finally:
        plt.close(fig)
    return spec.output_path


def _deterministic_metadata(output_path) -> dict:
    """Strip writer metadata that would vary between runs (dates etc.)."""
    suffix = Path(output_path).suffix.lower()
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return {}


def dump_data(spec: FigureSpec) -> list[str]:
    """Return the plotted data as CSV lines: ``label,wall_time_s,value``.

    Values are the raw parsed numbers (no clipping), formatted with 17
    significant digits so they round-trip the source CSV exactly.
    """
    lines = ["label,wall_time_s,value"]
    for curve in extract_curves(spec):
        for t, v in zip(curve.times, curve.values):
            lines.append(f"{curve.label},{t:.17g},{v:.17g}")
    return lines
