"""Forecast error metrics and the regime-by-lag comparison grid.

Metrics operate on unscaled prices.  MAPE is reported in percent.  Grids are
assembled per ticker with one cell per (regime, lag, dual) configuration;
configurations declared but not supplied are flagged missing, never
zero-filled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "MetricTriple",
    "ReportGrid",
    "rmse",
    "mae",
    "mape",
    "assemble_grid",
    "grid_table_rows",
    "write_grid_csv",
    "grid_to_json_dict",
    "write_grid_json",
    "long_format_rows",
    "write_long_csv",
    "DEFAULT_REGIMES",
]

MAPE_ACTUAL_TOLERANCE = 1e-9
DEFAULT_REGIMES = ("window=5", "window=10", "window=20", "window=50", "mece")

_METRIC_NAMES = ("RMSE", "MAE", "MAPE")

_REGIME_DISPLAY = {
    "window=5": "Training Window = 5",
    "window=10": "Training Window = 10",
    "window=20": "Training Window = 20",
    "window=50": "Training Window = 50",
    "mece": "MECE",
}


def _paired(pred, actual) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"prediction/actual shape mismatch: {p.shape} vs {a.shape}")
    if len(p) == 0:
        raise ValueError("metrics need at least one observation")
    return p, a


def rmse(pred, actual) -> float:
    """Root mean squared error."""
    p, a = _paired(pred, actual)
    diff = p - a
    return float(np.sqrt(np.mean(diff * diff)))


def mae(pred, actual) -> float:
    """Mean absolute error."""
    p, a = _paired(pred, actual)
    return float(np.mean(np.abs(p - a)))


def mape(pred, actual) -> float:
    """Mean absolute percentage error, in percent."""
    p, a = _paired(pred, actual)
    tiny = np.abs(a) <= MAPE_ACTUAL_TOLERANCE
    if tiny.any():
        idx = int(np.argmax(tiny))
        raise ValueError(f"actual[{idx}] = {a[idx]} is too close to zero for MAPE")
    return float(100.0 * np.mean(np.abs(p - a) / np.abs(a)))


@dataclass(frozen=True)
class MetricTriple:
    """RMSE and MAE in price units, MAPE in percent."""

    rmse: float
    mae: float
    mape: float

    def __post_init__(self) -> None:
        if self.rmse < 0 or self.mae < 0 or self.mape < 0:
            raise ValueError("metrics must be nonnegative")
        if self.mae > self.rmse * (1 + 1e-9) + 1e-12:
            raise ValueError(f"mae={self.mae} exceeds rmse={self.rmse}")

    @classmethod
    def of(cls, pred, actual) -> "MetricTriple":
        return cls(rmse=rmse(pred, actual), mae=mae(pred, actual), mape=mape(pred, actual))


@dataclass(frozen=True)
class ReportGrid:
    """Per-ticker grid of MetricTriples keyed by (regime label, lag, dual)."""

    ticker: str
    regimes: tuple[str, ...]
    lags: tuple[int, ...]
    duals: tuple[bool, ...]
    cells: dict

    @property
    def missing(self) -> tuple[tuple[str, int, bool], ...]:
        return tuple(key for key in self._keys() if self.cells[key] is None)

    def _keys(self):
        for regime in self.regimes:
            for lag in self.lags:
                for dual in self.duals:
                    yield (regime, lag, dual)


def assemble_grid(
    runs,
    *,
    regimes: tuple[str, ...] = DEFAULT_REGIMES,
    lags: tuple[int, ...] = (4, 9),
    duals: tuple[bool, ...] = (False, True),
) -> ReportGrid:
    """Fold forecast runs for one ticker into the declared configuration grid.

    Each run must carry ticker, lag, include_dual, regime.label, predictions,
    and actuals.  Duplicate configurations and runs outside the declared set
    are errors; declared configurations without a run are flagged missing.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("no runs supplied")
    tickers = sorted({r.ticker for r in runs})
    if len(tickers) > 1:
        raise ValueError(f"assemble_grid expects one ticker per grid, got {tickers}")
    declared = {(regime, lag, dual) for regime in regimes for lag in lags for dual in duals}
    cells: dict = {key: None for key in declared}
    for run in runs:
        key = (run.regime.label, run.lag, run.include_dual)
        if key not in declared:
            raise ValueError(f"run configuration {key} is outside the declared grid")
        if cells[key] is not None:
            raise ValueError(f"duplicate run for configuration {key}")
        cells[key] = MetricTriple.of(run.predictions, run.actuals)
    return ReportGrid(ticker=tickers[0], regimes=tuple(regimes), lags=tuple(lags), duals=tuple(duals), cells=cells)


def _column_names(grid: ReportGrid) -> list[str]:
    return [
        f"lag{lag}_dual_{'yes' if dual else 'no'}"
        for lag in grid.lags
        for dual in grid.duals
    ]


def grid_table_rows(grid: ReportGrid) -> list[list[str]]:
    """Comparison table: regime blocks of RMSE/MAE/MAPE rows, lag x dual columns."""
    header = ["regime", "metric"] + _column_names(grid)
    rows = [header]
    for regime in grid.regimes:
        display = _REGIME_DISPLAY.get(regime, regime)
        for metric in _METRIC_NAMES:
            row = [display, metric]
            for lag in grid.lags:
                for dual in grid.duals:
                    triple = grid.cells[(regime, lag, dual)]
                    if triple is None:
                        row.append("")
                    else:
                        value = getattr(triple, metric.lower())
                        row.append(f"{value:.4f}")
            rows.append(row)
    return rows


def write_grid_csv(grid: ReportGrid, path: str | Path) -> None:
    lines = [",".join(row) for row in grid_table_rows(grid)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def grid_to_json_dict(grid: ReportGrid) -> dict:
    cells = {}
    for regime, lag, dual in grid._keys():
        key = f"{regime}|lag={lag}|dual={'yes' if dual else 'no'}"
        triple = grid.cells[(regime, lag, dual)]
        cells[key] = (
            None
            if triple is None
            else {"rmse": triple.rmse, "mae": triple.mae, "mape": triple.mape}
        )
    return {
        "ticker": grid.ticker,
        "regimes": list(grid.regimes),
        "lags": list(grid.lags),
        "duals": ["yes" if d else "no" for d in grid.duals],
        "cells": cells,
        "missing": [
            f"{regime}|lag={lag}|dual={'yes' if dual else 'no'}"
            for regime, lag, dual in grid.missing
        ],
    }


def write_grid_json(grid: ReportGrid, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(grid_to_json_dict(grid), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def long_format_rows(grids) -> list[list[str]]:
    """Flat rows ticker,regime,window,lag,dual,metric,value across grids."""
    rows = [["ticker", "regime", "window", "lag", "dual", "metric", "value"]]
    for grid in grids:
        for regime, lag, dual in grid._keys():
            triple = grid.cells[(regime, lag, dual)]
            if triple is None:
                continue
            window = regime.split("=", 1)[1] if regime.startswith("window=") else ""
            kind = "rolling" if window else "mece"
            for metric in _METRIC_NAMES:
                value = getattr(triple, metric.lower())
                rows.append(
                    [
                        grid.ticker,
                        kind,
                        window,
                        str(lag),
                        "yes" if dual else "no",
                        metric,
                        f"{value:.4f}",
                    ]
                )
    return rows


def write_long_csv(grids, path: str | Path) -> None:
    lines = [",".join(row) for row in long_format_rows(grids)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
