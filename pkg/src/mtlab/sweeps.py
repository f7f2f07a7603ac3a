"""Dyadic R-sweeps, slope fits, and CSV/JSON persistence.

A sweep runs a deterministic instance generator over a list of scales,
records per-R (lhs, rhs, ratio), and fits an ordinary least-squares slope in
log2-log2 coordinates.  The normalizer argument strips a known power of R
from the lhs so the ideal slope is 0; sweeping with normalizer=None fits the
raw growth and should recover the reference exponent.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

LIB_VERSION = "0.1.0"

CSV_COLUMNS = ["inequality_id", "n", "R", "lhs", "rhs", "ratio"]


@dataclass
class SweepRow:
    R: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


@dataclass
class SweepResult:
    ineq_id: str
    n: int
    rows: list[SweepRow]
    slope: float
    residual: float
    reference_exponent: Optional[float] = None
    seed: int = 0
    config: dict = field(default_factory=dict)
    degenerate: bool = False

    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    def config_hash(self) -> str:
        payload = json.dumps(
            {"config": self.config, "seed": self.seed, "id": self.ineq_id, "n": self.n},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    # -- persistence ---------------------------------------------------------

    def csv_text(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for row in self.rows:
            wr.writerow(
                [self.ineq_id, self.n, _fmt(row.R), _fmt(row.lhs), _fmt(row.rhs), _fmt(row.ratio)]
            )
        return buf.getvalue()

    def sidecar_dict(self) -> dict:
        return {
            "inequality_id": self.ineq_id,
            "n": self.n,
            "slope": round(self.slope, 12),
            "residual": round(self.residual, 12),
            "reference_exponent": self.reference_exponent,
            "seed": self.seed,
            "config": self.config,
            "config_hash": self.config_hash(),
            "version": LIB_VERSION,
            "degenerate": self.degenerate,
        }

    def write(self, csv_path, sidecar_path) -> None:
        with open(csv_path, "w") as fh:
            fh.write(self.csv_text())
        with open(sidecar_path, "w") as fh:
            json.dump(self.sidecar_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def fit_slope(R_list, values) -> tuple[float, float]:
    """OLS slope of log2(values) against log2(R) with rms residual."""
    lr = np.log2(np.asarray(R_list, dtype=float))
    lv = np.log2(np.asarray(values, dtype=float))
    coef = np.polyfit(lr, lv, 1)
    fitv = np.polyval(coef, lr)
    return float(coef[0]), float(np.sqrt(np.mean((lv - fitv) ** 2)))


def exponent_sweep(
    ineq_id: str,
    n: int,
    R_list: list[float],
    instance_fn: Callable[[float], tuple[float, float]],
    normalizer: Optional[Callable[[float], float]] = None,
    reference_exponent: Optional[float] = None,
    seed: int = 0,
    config: Optional[dict] = None,
) -> SweepResult:
    """instance_fn(R) -> (lhs, rhs); the fitted slope is of
    log2(lhs / normalizer(R)) unless the lhs degenerates to 0."""
    if len(R_list) < 3:
        raise ConfigError("a sweep needs at least 3 scales")
    rows = []
    for R in R_list:
        lhs, rhs = instance_fn(float(R))
        rows.append(SweepRow(R=float(R), lhs=lhs, rhs=rhs))
    vals = np.array([row.lhs / (normalizer(row.R) if normalizer else 1.0) for row in rows])
    degenerate = bool(np.any(vals <= 0))
    if degenerate:
        slope, residual = 0.0, float("inf")
    else:
        slope, residual = fit_slope([row.R for row in rows], vals)
    return SweepResult(
        ineq_id=ineq_id, n=n, rows=rows, slope=slope, residual=residual,
        reference_exponent=reference_exponent, seed=seed, config=config or {},
        degenerate=degenerate,
    )


def ratio_slope(result: SweepResult) -> float:
    """Slope of log2(ratio) vs log2(R); degenerate rows poison it to +inf."""
    ratios = result.ratios()
    if np.any(ratios <= 0):
        return float("inf")
    slope, _ = fit_slope([row.R for row in result.rows], ratios)
    return slope


def merge_csv(results: list[SweepResult]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for res in results:
        for row in res.rows:
            wr.writerow([res.ineq_id, res.n, _fmt(row.R), _fmt(row.lhs), _fmt(row.rhs), _fmt(row.ratio)])
    return buf.getvalue()
