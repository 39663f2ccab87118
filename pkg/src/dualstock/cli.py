"""Batch command-line pipeline: ingestion, premiums, coherence, forecasts.

Subcommands: ``premiums``, ``coherence``, ``forecast``, ``run`` (the
analyses selected in the config, optionally filtered with ``--only``), and
``report`` (re-assemble metric grids from existing run manifests).  A single
declarative JSON config plus flag overrides drives everything; the master
seed deterministically derives one child seed per analysis unit, so reruns
with identical inputs and config are byte-identical.  Every invocation
writes a manifest listing emitted files and their content hashes.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .forecast import ForecastRun, RegimeSpec, forecast_mece, forecast_rolling
from .lstm import TrainConfig
from .metrics import (
    DEFAULT_REGIMES,
    assemble_grid,
    write_grid_csv,
    write_grid_json,
    write_long_csv,
)
from .seeds import child_seed
from .significance import MonteCarloSpec, significance
from .svgplot import render_heatmap
from .timeseries import (
    CsvFormat,
    PriceSeries,
    align_series,
    daily_returns,
    load_ohlc_csv,
    premium_series,
    premium_summary,
    render_summary_csv,
    summary_to_dict,
)
from .wavelet import MorletSpec, ScaleGrid, SmoothingSpec, coherence, cwt

__all__ = ["RunConfig", "load_config", "cmd_premiums", "cmd_coherence", "cmd_forecast", "cmd_report", "main"]

OUT_DIR_ENV = "DUALSTOCK_OUT"
MIN_COHERENCE_LENGTH = 64
ANALYSES = ("premiums", "coherence", "forecast")


@dataclass(frozen=True)
class WaveletOptions:
    omega0: float = 6.0
    s0: float = 2.0
    dj: float = 1.0 / 12.0
    num_scales: int | None = None
    time_std_scales: float = 1.0
    scale_window_octaves: float = 0.6
    mc_iterations: int = 1000
    significance_level: float = 0.05


@dataclass(frozen=True)
class ForecastOptions:
    lags: tuple[int, ...] = (4, 9)
    duals: tuple[bool, ...] = (False, True)
    windows: tuple[int, ...] = (5, 10, 20, 50)
    mece_train_size: int | None = 5282  # None drops the MECE regime
    test_size: int = 300
    retrain_per_origin: bool = True
    epochs: int = 200
    hidden_size: int = 16
    learning_rate: float = 1e-2
    clip_norm: float = 1.0
    tickers: tuple[str, ...] | None = None  # forecast subset; all loaded tickers if None


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline configuration (paths resolved, files checked)."""

    tickers: tuple[tuple[str, Path], ...]
    out_dir: Path
    seed: int
    analyses: tuple[str, ...] = ANALYSES
    percent: bool = False
    csv_format: CsvFormat = CsvFormat()
    wavelet: WaveletOptions = WaveletOptions()
    forecast: ForecastOptions = ForecastOptions()

    def __post_init__(self) -> None:
        if not self.tickers:
            raise ValueError("config must declare at least one ticker")
        for analysis in self.analyses:
            if analysis not in ANALYSES:
                raise ValueError(f"unknown analysis {analysis!r}; choose from {ANALYSES}")
        for name, path in self.tickers:
            if not Path(path).is_file():
                raise ValueError(f"input file for ticker {name} not found: {path}")


def _pick(raw: dict, section: str, cls, defaults):
    data = raw.get(section, {})
    if not isinstance(data, dict):
        raise ValueError(f"config section {section!r} must be an object")
    allowed = set(defaults.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    merged = {**{k: getattr(defaults, k) for k in allowed}, **data}
    for key in ("lags", "duals", "windows", "tickers"):
        if key in merged and isinstance(merged[key], list):
            merged[key] = tuple(merged[key])
    return cls(**merged)


def load_config(
    path: str | Path,
    seed: int | None = None,
    out_dir: str | Path | None = None,
) -> RunConfig:
    """Parse and validate a JSON config file, applying flag overrides."""
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    known = {"tickers", "out_dir", "seed", "analyses", "percent", "csv", "wavelet", "forecast"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "tickers" not in raw or not isinstance(raw["tickers"], dict):
        raise ValueError("config must map ticker names to CSV paths under 'tickers'")
    base = path.parent
    tickers = tuple(
        (name, (base / p).resolve() if not Path(p).is_absolute() else Path(p))
        for name, p in raw["tickers"].items()
    )
    resolved_out = out_dir or raw.get("out_dir") or os.environ.get(OUT_DIR_ENV)
    if resolved_out is None:
        raise ValueError("no output directory: set out_dir in config, --out, or " + OUT_DIR_ENV)
    resolved_seed = seed if seed is not None else raw.get("seed")
    if resolved_seed is None:
        raise ValueError("no master seed: set seed in config or pass --seed")
    csv_defaults = CsvFormat()
    csv_raw = dict(raw.get("csv", {}))
    allowed = set(csv_defaults.__dataclass_fields__)
    unknown = set(csv_raw) - allowed
    if unknown:
        raise ValueError(f"unknown keys in config section 'csv': {sorted(unknown)}")
    csv_format = CsvFormat(**{**{k: getattr(csv_defaults, k) for k in allowed}, **csv_raw})
    analyses = tuple(raw.get("analyses", ANALYSES))
    return RunConfig(
        tickers=tickers,
        out_dir=Path(resolved_out),
        seed=int(resolved_seed),
        analyses=analyses,
        percent=bool(raw.get("percent", False)),
        csv_format=csv_format,
        wavelet=_pick(raw, "wavelet", WaveletOptions, WaveletOptions()),
        forecast=_pick(raw, "forecast", ForecastOptions, ForecastOptions()),
    )


@dataclass
class CommandOutcome:
    files: list[Path] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def merge(self, other: "CommandOutcome") -> None:
        self.files.extend(other.files)
        self.failures.extend(other.failures)


def _load_all(config: RunConfig) -> list[tuple[str, PriceSeries]]:
    return [
        (name, load_ohlc_csv(path, config.csv_format, ticker=name))
        for name, path in config.tickers
    ]


def _write(path: Path, text: str, outcome: CommandOutcome) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    outcome.files.append(path)


def cmd_premiums(config: RunConfig) -> CommandOutcome:
    """Premium series and summary stats for every ticker pair."""
    outcome = CommandOutcome()
    series = _load_all(config)
    if len(series) < 2:
        raise ValueError("premiums needs at least two tickers")
    out = config.out_dir / "premiums"
    for (name_a, a), (name_b, b) in itertools.combinations(series, 2):
        label = f"{name_a}_over_{name_b}"
        aligned_a, aligned_b = align_series(a, b)
        if aligned_a.n == 0:
            outcome.failures.append(f"premiums {label}: empty date intersection")
            continue
        premiums = premium_series(aligned_a, aligned_b)
        stats = premium_summary(premiums)
        scale = 100.0 if config.percent else 1.0
        lines = ["date,premium"]
        lines += [
            f"{d.isoformat()},{v * scale:.6f}" for d, v in zip(premiums.dates, premiums.values)
        ]
        _write(out / f"{label}_series.csv", "\n".join(lines) + "\n", outcome)
        _write(out / f"{label}_summary.csv", render_summary_csv(stats, config.percent), outcome)
        _write(
            out / f"{label}_summary.json",
            json.dumps(summary_to_dict(stats, config.percent), indent=2, sort_keys=True) + "\n",
            outcome,
        )
    return outcome


def _coherence_csv(field, dates) -> str:
    inside = field.inside_coi()
    scales = field.grid.scales
    periods = field.grid.fourier_periods
    significant = field.significant
    rows = ["time_index,date,scale_days,period_days,rho2,phase_rad,significant,inside_coi"]
    for j in range(field.grid.num_scales):
        scale_s = f"{scales[j]:.6f}"
        period_s = f"{periods[j]:.6f}"
        for t in range(field.n):
            sig = int(significant[j, t]) if significant is not None else 0
            rows.append(
                f"{t},{dates[t].isoformat()},{scale_s},{period_s},"
                f"{field.rho2[j, t]:.6f},{field.phase[j, t]:.6f},{sig},{int(inside[j, t])}"
            )
    return "\n".join(rows) + "\n"


def cmd_coherence(config: RunConfig) -> CommandOutcome:
    """Returns -> CWT -> coherence -> significance -> CSV + SVG per pair."""
    outcome = CommandOutcome()
    series = _load_all(config)
    if len(series) < 2:
        raise ValueError("coherence needs at least two tickers")
    out = config.out_dir / "coherence"
    w = config.wavelet
    morlet = MorletSpec(omega0=w.omega0)
    sspec = SmoothingSpec(
        time_std_scales=w.time_std_scales, scale_window_octaves=w.scale_window_octaves
    )
    for (name_a, a), (name_b, b) in itertools.combinations(series, 2):
        label = f"{name_a}_{name_b}"
        aligned_a, aligned_b = align_series(a, b)
        if aligned_a.n < MIN_COHERENCE_LENGTH + 1:
            outcome.failures.append(
                f"coherence {label}: need at least {MIN_COHERENCE_LENGTH + 1} common dates, "
                f"got {aligned_a.n}"
            )
            continue
        returns_a = daily_returns(aligned_a)
        returns_b = daily_returns(aligned_b)
        n = returns_a.n
        if w.num_scales is None:
            grid = ScaleGrid.for_length(n, s0=w.s0, dj=w.dj, omega0=w.omega0)
        else:
            grid = ScaleGrid(s0=w.s0, dj=w.dj, num_scales=w.num_scales, omega0=w.omega0)
        mc = MonteCarloSpec(
            seed=child_seed(config.seed, f"coherence:{name_a}/{name_b}"),
            iterations=w.mc_iterations,
            significance_level=w.significance_level,
        )
        field = coherence(cwt(returns_a.values, grid, morlet), cwt(returns_b.values, grid, morlet), sspec)
        mask = significance(returns_a.values, returns_b.values, grid, sspec, mc=mc, morlet=morlet)
        field = field.with_significance(mask)
        _write(out / f"{label}.csv", _coherence_csv(field, returns_a.dates), outcome)
        svg_path = out / f"{label}.svg"
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        render_heatmap(
            field,
            svg_path,
            dates=returns_a.dates,
            title=f"{name_a} / {name_b} squared coherence",
        )
        outcome.files.append(svg_path)
    return outcome


def _run_stem(run: ForecastRun) -> str:
    dual = "yes" if run.include_dual else "no"
    regime = "mece" if run.regime.kind == "mece" else f"w{run.regime.window}"
    return f"{run.ticker}_lag{run.lag}_dual-{dual}_{regime}"


def _predictions_csv(run: ForecastRun) -> str:
    rows = ["origin_index,date,actual,predicted,train_start,train_end"]
    for k in range(len(run.origins)):
        date = run.dates[k].isoformat() if run.dates is not None else ""
        start, end = run.provenance[k]
        # repr of the Python float is the shortest exact round-trip, so the
        # report command reproduces the same metrics bit for bit
        rows.append(
            f"{int(run.origins[k])},{date},{float(run.actuals[k])!r},"
            f"{float(run.predictions[k])!r},{start},{end}"
        )
    return "\n".join(rows) + "\n"


def _run_manifest(run: ForecastRun, config: RunConfig, csv_name: str) -> dict:
    f = config.forecast
    return {
        "ticker": run.ticker,
        "lag": run.lag,
        "dual": "yes" if run.include_dual else "no",
        "regime": {
            "kind": run.regime.kind,
            "window": run.regime.window,
            "train_size": run.regime.train_size,
            "test_size": run.regime.test_size,
            "retrain_per_origin": run.regime.retrain_per_origin,
        },
        "seed": run.seed,
        "hyperparameters": {
            "epochs": f.epochs,
            "hidden_size": f.hidden_size,
            "learning_rate": f.learning_rate,
            "clip_norm": f.clip_norm,
            "optimizer": "adam",
        },
        "predictions_csv": csv_name,
    }


def _align_all(series: list[tuple[str, PriceSeries]]):
    common = set(series[0][1].dates)
    for _, s in series[1:]:
        common &= set(s.dates)
    aligned = []
    for name, s in series:
        idx = [i for i, d in enumerate(s.dates) if d in common]
        aligned.append((name, s.take(idx)))
    return aligned


def cmd_forecast(config: RunConfig) -> CommandOutcome:
    """Execute the declared (ticker x lag x dual x regime) grid."""
    outcome = CommandOutcome()
    series = _align_all(_load_all(config))
    if series and series[0][1].n == 0:
        raise ValueError("forecast: tickers share no common dates")
    f = config.forecast
    out = config.out_dir / "forecast"
    regimes: list[RegimeSpec] = [
        RegimeSpec(kind="rolling", test_size=f.test_size, window=wnd, retrain_per_origin=f.retrain_per_origin)
        for wnd in f.windows
    ]
    if f.mece_train_size is not None:
        regimes.append(RegimeSpec(kind="mece", test_size=f.test_size, train_size=f.mece_train_size))
    names = [name for name, _ in series]
    mids = {name: s.mid for name, s in series}
    dates = series[0][1].dates if series else ()
    targets = names if f.tickers is None else list(f.tickers)
    unknown = set(targets) - set(names)
    if unknown:
        raise ValueError(f"forecast tickers {sorted(unknown)} are not declared inputs")
    runs_by_ticker: dict[str, list[ForecastRun]] = {name: [] for name in targets}

    for name in targets:
        siblings = tuple(mids[other] for other in names if other != name)
        for lag in f.lags:
            for dual in f.duals:
                if dual and len(siblings) != 2:
                    outcome.failures.append(
                        f"forecast {name} lag={lag} dual=yes: needs exactly 3 tickers, "
                        f"got {len(names)}"
                    )
                    continue
                for regime in regimes:
                    seed = child_seed(
                        config.seed,
                        f"forecast:{name}:lag={lag}:dual={'yes' if dual else 'no'}:{regime.label}",
                    )
                    cfg = TrainConfig(
                        seed=seed,
                        epochs=f.epochs,
                        learning_rate=f.learning_rate,
                        hidden_size=f.hidden_size,
                        clip_norm=f.clip_norm,
                    )
                    try:
                        if regime.kind == "mece":
                            run = forecast_mece(
                                mids[name],
                                siblings if dual else None,
                                lag=lag,
                                include_dual=dual,
                                cfg=cfg,
                                train_size=regime.train_size,
                                test_size=regime.test_size,
                                ticker=name,
                                dates=dates,
                            )
                        else:
                            run = forecast_rolling(
                                mids[name],
                                siblings if dual else None,
                                window=regime.window,
                                lag=lag,
                                include_dual=dual,
                                cfg=cfg,
                                test_size=regime.test_size,
                                retrain_per_origin=regime.retrain_per_origin,
                                ticker=name,
                                dates=dates,
                            )
                    except ValueError as exc:
                        outcome.failures.append(
                            f"forecast {name} lag={lag} dual={'yes' if dual else 'no'} "
                            f"{regime.label}: {exc}"
                        )
                        continue
                    stem = _run_stem(run)
                    _write(out / "runs" / f"{stem}.csv", _predictions_csv(run), outcome)
                    _write(
                        out / "runs" / f"{stem}.json",
                        json.dumps(_run_manifest(run, config, f"{stem}.csv"), indent=2, sort_keys=True) + "\n",
                        outcome,
                    )
                    runs_by_ticker[name].append(run)

    declared_regimes = tuple(r.label for r in regimes)
    grids = []
    for name in targets:
        runs = runs_by_ticker[name]
        if not runs:
            continue
        grid = assemble_grid(runs, regimes=declared_regimes, lags=f.lags, duals=f.duals)
        grids.append(grid)
        csv_path = out / "grids" / f"{name}.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_grid_csv(grid, csv_path)
        outcome.files.append(csv_path)
        json_path = out / "grids" / f"{name}.json"
        write_grid_json(grid, json_path)
        outcome.files.append(json_path)
    if grids:
        long_path = out / "grids" / "long.csv"
        write_long_csv(grids, long_path)
        outcome.files.append(long_path)
    return outcome


@dataclass
class _StoredRun:
    """Forecast run reconstructed from a run manifest + predictions CSV."""

    ticker: str
    lag: int
    include_dual: bool
    regime: RegimeSpec
    predictions: np.ndarray
    actuals: np.ndarray


def _read_run(manifest_path: Path) -> _StoredRun:
    meta = json.loads(manifest_path.read_text(encoding="utf-8"))
    csv_path = manifest_path.parent / meta["predictions_csv"]
    actuals: list[float] = []
    predictions: list[float] = []
    with csv_path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        idx_actual = header.index("actual")
        idx_predicted = header.index("predicted")
        for line in fh:
            cells = line.rstrip("\n").split(",")
            actuals.append(float(cells[idx_actual]))
            predictions.append(float(cells[idx_predicted]))
    regime = RegimeSpec(
        kind=meta["regime"]["kind"],
        test_size=meta["regime"]["test_size"],
        train_size=meta["regime"]["train_size"],
        window=meta["regime"]["window"],
        retrain_per_origin=meta["regime"]["retrain_per_origin"],
    )
    return _StoredRun(
        ticker=meta["ticker"],
        lag=int(meta["lag"]),
        include_dual=meta["dual"] == "yes",
        regime=regime,
        predictions=np.asarray(predictions),
        actuals=np.asarray(actuals),
    )


def cmd_report(runs_dir: Path, out_dir: Path) -> CommandOutcome:
    """Re-assemble full regime-by-lag metric grids from existing run manifests."""
    outcome = CommandOutcome()
    manifests = sorted(Path(runs_dir).glob("*.json"))
    if not manifests:
        raise ValueError(f"no run manifests (*.json) found in {runs_dir}")
    runs = [_read_run(p) for p in manifests]
    by_ticker: dict[str, list[_StoredRun]] = {}
    for run in runs:
        by_ticker.setdefault(run.ticker, []).append(run)

    observed_windows = sorted(
        {r.regime.window for r in runs if r.regime.kind == "rolling"}
    )
    default_windows = [int(label.split("=")[1]) for label in DEFAULT_REGIMES if label.startswith("window=")]
    window_labels = [f"window={w}" for w in sorted(set(default_windows) | set(observed_windows))]
    regimes = tuple(window_labels + ["mece"])
    lags = tuple(sorted({4, 9} | {r.lag for r in runs}))

    out = Path(out_dir) / "report"
    grids = []
    for ticker in sorted(by_ticker):
        grid = assemble_grid(by_ticker[ticker], regimes=regimes, lags=lags, duals=(False, True))
        grids.append(grid)
        csv_path = out / f"{ticker}.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_grid_csv(grid, csv_path)
        outcome.files.append(csv_path)
        json_path = out / f"{ticker}.json"
        write_grid_json(grid, json_path)
        outcome.files.append(json_path)
    long_path = out / "long.csv"
    write_long_csv(grids, long_path)
    outcome.files.append(long_path)
    return outcome


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, seed: int | None, outcome: CommandOutcome) -> Path:
    entries = sorted(
        {str(p.resolve().relative_to(out_dir.resolve())) for p in outcome.files}
    )
    manifest = {
        "command": command,
        "seed": seed,
        "outputs": [{"path": p, "sha256": _sha256(out_dir / p)} for p in entries],
        "failures": sorted(outcome.failures),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualstock",
        description="Dual-class stock analytics: premiums, wavelet coherence, LSTM forecasts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("premiums", "pairwise premium series and summary statistics"),
        ("coherence", "wavelet coherence fields with Monte-Carlo significance"),
        ("forecast", "LSTM forecast grid over regimes, lags, and dual options"),
        ("run", "analyses selected by the config (filter with --only)"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")
        if name == "run":
            p.add_argument(
                "--only",
                choices=ANALYSES,
                default=None,
                help="run a single analysis from the config selection",
            )
    rep = sub.add_parser("report", help="re-assemble metric grids from run manifests")
    rep.add_argument("--runs", required=True, help="directory containing run manifests (*.json)")
    rep.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "report":
        outcome = CommandOutcome()
        seed = None
        out_dir = Path(args.out)
        try:
            outcome = cmd_report(Path(args.runs), out_dir)
        except (ValueError, OSError) as exc:
            outcome.failures.append(f"report: {exc}")
        command = "report"
    else:
        try:
            config = load_config(args.config, seed=args.seed, out_dir=args.out)
        except (ValueError, OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        seed = config.seed
        out_dir = config.out_dir
        if args.command == "run":
            selected = config.analyses if args.only is None else (args.only,)
            command = "run:" + ",".join(selected)
        else:
            selected = (args.command,)
            command = args.command
        outcome = CommandOutcome()
        handlers = {"premiums": cmd_premiums, "coherence": cmd_coherence, "forecast": cmd_forecast}
        for analysis in selected:
            try:
                outcome.merge(handlers[analysis](config))
            except (ValueError, OSError) as exc:
                outcome.failures.append(f"{analysis}: {exc}")
    manifest_path = _write_manifest(out_dir, command, seed, outcome)
    print(f"{len(outcome.files)} files written under {out_dir} (manifest: {manifest_path.name})")
    for failure in outcome.failures:
        print(f"FAILED: {failure}", file=sys.stderr)
    return 1 if outcome.failures else 0


if __name__ == "__main__":
    sys.exit(main())
