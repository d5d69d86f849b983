"""Oracle-cost counters and per-iteration run traces."""

from __future__ import annotations

import time
from dataclasses import dataclass, field


@dataclass
class OracleCounters:
    """Cumulative oracle-call counts owned by a single run.

    ``grad_evals`` counts operator/gradient evaluations used by the
    algorithm itself; evaluations done purely for metric reporting are
    tracked separately by the trace under ``metric_grad_evals``.
    """

    grad_evals: int = 0
    jac_evals: int = 0
    factorizations: int = 0
    linear_solves: int = 0

    def snapshot(self) -> "OracleCounters":
        return OracleCounters(
            self.grad_evals, self.jac_evals, self.factorizations, self.linear_solves
        )

    def as_tuple(self):
        return (self.grad_evals, self.jac_evals, self.factorizations, self.linear_solves)


@dataclass
class TraceRecord:
    iter: int
    wall_time_s: float
    counters: OracleCounters
    metrics: dict[str, float]


@dataclass
class RunTrace:
    """Per-iteration records plus free-form run metadata."""

    records: list[TraceRecord] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self._t0 = time.perf_counter()

    def reset_clock(self):
        self._t0 = time.perf_counter()

    def add(self, iter_idx: int, counters: OracleCounters, metrics: dict[str, float]):
        if not metrics:
            raise ValueError("every trace record needs at least one metric")
        now = time.perf_counter() - self._t0
        if self.records:
            prev = self.records[-1]
            if iter_idx <= prev.iter:
                raise ValueError("iteration indices must be strictly increasing")
            now = max(now, prev.wall_time_s)
        self.records.append(TraceRecord(iter_idx, now, counters.snapshot(), dict(metrics)))

    def bump_metric_evals(self, n: int = 1):
        self.metadata["metric_grad_evals"] = self.metadata.get("metric_grad_evals", 0) + n

    def last_iter(self) -> int:
        return self.records[-1].iter if self.records else -1

    def extend(self, other: "RunTrace", time_offset: float | None = None):
        """Append another trace's records, shifting iteration numbers.

        Counters in ``other`` are taken as-is, so epoch composition is
        exact when both traces share one :class:`OracleCounters`.
        """
        offset = self.last_iter() + 1
        t_off = time_offset
        if t_off is None:
            t_off = self.records[-1].wall_time_s if self.records else 0.0
        for rec in other.records:
            self.records.append(
                TraceRecord(rec.iter + offset, rec.wall_time_s + t_off, rec.counters, rec.metrics)
            )
        extra = other.metadata.get("metric_grad_evals", 0)
        if extra:
            self.bump_metric_evals(extra)
