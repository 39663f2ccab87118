"""Price scaling, lagged feature construction, and the two training regimes.

Prices are mapped to x/100 - 1 before modeling (no min-max scaling: the test
range must stay unknown at training time) and predictions are mapped back to
price units.  Two regimes are supported: a single mutually-exclusive
train/test split ("mece") and rolling windows that retrain on exactly the w
observations preceding each forecast origin.  Every forecast is a pure
function of observations strictly before its origin; the provenance field
records the exact training index range per origin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .lstm import FeatureSample, TrainConfig, predict, train
from .seeds import child_seed

__all__ = [
    "PriceScaleWarning",
    "RegimeSpec",
    "ForecastRun",
    "scale_price",
    "unscale",
    "build_supervised",
    "forecast_mece",
    "forecast_rolling",
]

SCALE_CEILING = 200.0  # price at which x/100 - 1 leaves the tanh range


class PriceScaleWarning(UserWarning):
    """Price at or above 200 breaches the below-100 scaling assumption."""


def scale_price(x):
    """Map prices to x/100 - 1 (dimensionless, below 1 for prices < 200)."""
    arr = np.asarray(x, dtype=np.float64)
    if (arr <= 0).any():
        raise ValueError("prices must be strictly positive")
    if (arr >= SCALE_CEILING).any():
        warnings.warn(
            f"price >= {SCALE_CEILING:.0f} scales to >= 1, outside the tanh range",
            PriceScaleWarning,
            stacklevel=2,
        )
    scaled = arr / 100.0 - 1.0
    return float(scaled) if scaled.ndim == 0 else scaled


def unscale(y):
    """Inverse scaling: 100 * (y + 1)."""
    arr = np.asarray(y, dtype=np.float64)
    prices = 100.0 * (arr + 1.0)
    return float(prices) if prices.ndim == 0 else prices


def build_supervised(
    own,
    siblings=None,
    *,
    lag: int,
    include_dual: bool = False,
) -> list[FeatureSample]:
    """Causal (inputs, target) pairs from scaled series.

    The sample targeting index t takes its L = lag input steps from indices
    t-lag .. t-1.  Each step's vector is the own value alone (D = 1), or
    [own, sibling1, sibling2] when ``include_dual`` (D = 3).  Sibling data is
    not touched at all unless ``include_dual`` is set.  Inputs are copied, so
    later mutation of the source arrays cannot leak into samples.
    """
    own = np.asarray(own, dtype=np.float64)
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if len(own) <= lag:
        raise ValueError(f"need more than lag={lag} observations, got {len(own)}")
    if include_dual:
        if siblings is None or len(siblings) != 2:
            raise ValueError("include_dual requires exactly two sibling series")
        sib1 = np.asarray(siblings[0], dtype=np.float64)
        sib2 = np.asarray(siblings[1], dtype=np.float64)
        if sib1.shape != own.shape or sib2.shape != own.shape:
            raise ValueError("sibling series must be aligned with the own series")
        features = np.column_stack([own, sib1, sib2])
    else:
        features = own[:, None]
    return [
        FeatureSample(inputs=features[t - lag : t].copy(), target=own[t])
        for t in range(lag, len(own))
    ]


@dataclass(frozen=True)
class RegimeSpec:
    """Training-set regime: a single MECE split or rolling windows.

    MECE: one model on the first ``train_size`` observations forecasts all
    ``test_size`` test origins.  Rolling: each origin gets a model trained on
    exactly the ``window`` observations preceding it (or, with
    ``retrain_per_origin`` off, one model trained on the window preceding the
    first origin is reused).
    """

    kind: str
    test_size: int
    train_size: int | None = None
    window: int | None = None
    retrain_per_origin: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("mece", "rolling"):
            raise ValueError(f"kind must be 'mece' or 'rolling', got {self.kind!r}")
        if self.test_size < 1:
            raise ValueError("test_size must be >= 1")
        if self.kind == "mece":
            if self.train_size is None or self.train_size < 2:
                raise ValueError("mece regime requires train_size >= 2")
        else:
            if self.window is None or self.window < 2:
                raise ValueError("rolling regime requires window >= 2")

    @property
    def label(self) -> str:
        return "mece" if self.kind == "mece" else f"window={self.window}"


@dataclass(frozen=True)
class ForecastRun:
    """Predictions, actuals, and per-origin training provenance for one config."""

    ticker: str
    lag: int
    include_dual: bool
    regime: RegimeSpec
    seed: int
    predictions: np.ndarray
    actuals: np.ndarray
    origins: np.ndarray
    provenance: tuple[tuple[int, int], ...]
    dates: tuple | None = None

    def __post_init__(self) -> None:
        predictions = np.asarray(self.predictions, dtype=np.float64)
        actuals = np.asarray(self.actuals, dtype=np.float64)
        origins = np.asarray(self.origins, dtype=np.int64)
        if not (len(predictions) == len(actuals) == len(origins) == self.regime.test_size):
            raise ValueError("predictions/actuals/origins must all have length test_size")
        if len(self.provenance) != len(origins):
            raise ValueError("one provenance range required per origin")
        for (start, end), origin in zip(self.provenance, origins):
            if not (0 <= start <= end <= origin):
                raise ValueError(
                    f"provenance [{start}, {end}) must precede its origin {origin}"
                )
        for arr in (predictions, actuals, origins):
            arr.flags.writeable = False
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "actuals", actuals)
        object.__setattr__(self, "origins", origins)
        object.__setattr__(
            self, "provenance", tuple((int(start), int(end)) for start, end in self.provenance)
        )


def _scaled_inputs(own, siblings, include_dual):
    scaled_own = scale_price(own)
    if include_dual:
        if siblings is None or len(siblings) != 2:
            raise ValueError("include_dual requires exactly two sibling series")
        scaled_sibs = tuple(scale_price(s) for s in siblings)
        if any(s.shape != scaled_own.shape for s in scaled_sibs):
            raise ValueError("sibling series must be aligned with the own series")
        return scaled_own, scaled_sibs
    return scaled_own, None


def _query_window(scaled_own, scaled_siblings, origin, lag, include_dual):
    if include_dual:
        block = np.column_stack(
            [scaled_own[origin - lag : origin]]
            + [s[origin - lag : origin] for s in scaled_siblings]
        )
    else:
        block = scaled_own[origin - lag : origin, None]
    return block


def forecast_mece(
    own,
    siblings=None,
    *,
    lag: int,
    include_dual: bool = False,
    cfg: TrainConfig,
    train_size: int,
    test_size: int,
    ticker: str = "",
    dates=None,
) -> ForecastRun:
    """One model trained on the first ``train_size`` observations.

    All ``test_size`` forecasts (the final observations of the series) come
    from that single model; each uses only the lag window strictly before its
    origin.  Provenance is [0, train_size) for every origin.
    """
    own = np.asarray(own, dtype=np.float64)
    n = len(own)
    if n < train_size + test_size:
        raise ValueError(
            f"need at least train_size+test_size={train_size + test_size} observations, got {n}"
        )
    if train_size <= lag:
        raise ValueError(f"train_size={train_size} leaves no samples at lag={lag}")
    scaled_own, scaled_sibs = _scaled_inputs(own, siblings, include_dual)
    train_sibs = None if scaled_sibs is None else tuple(s[:train_size] for s in scaled_sibs)
    samples = build_supervised(
        scaled_own[:train_size], train_sibs, lag=lag, include_dual=include_dual
    )
    result = train(samples, cfg)
    origins = np.arange(n - test_size, n)
    predictions = np.empty(test_size)
    for k, origin in enumerate(origins):
        window = _query_window(scaled_own, scaled_sibs, origin, lag, include_dual)
        predictions[k] = unscale(predict(result.params, window))
    regime = RegimeSpec(kind="mece", test_size=test_size, train_size=train_size)
    return ForecastRun(
        ticker=ticker,
        lag=lag,
        include_dual=include_dual,
        regime=regime,
        seed=cfg.seed,
        predictions=predictions,
        actuals=own[origins],
        origins=origins,
        provenance=((0, train_size),) * test_size,
        dates=None if dates is None else tuple(dates[i] for i in origins),
    )


def forecast_rolling(
    own,
    siblings=None,
    *,
    window: int,
    lag: int,
    include_dual: bool = False,
    cfg: TrainConfig,
    test_size: int,
    retrain_per_origin: bool = True,
    ticker: str = "",
    dates=None,
) -> ForecastRun:
    """Rolling regime: train on exactly the ``window`` observations before each origin.

    With ``retrain_per_origin`` (the default) a fresh, cold-started model is
    fitted per origin, seeded per origin from cfg.seed, so a forecast depends
    only on its own window.  Provenance for origin t is [t-window, t).
    """
    if window <= lag:
        raise ValueError(f"window={window} too small for lag={lag}; need window >= lag+1")
    own = np.asarray(own, dtype=np.float64)
    n = len(own)
    first_origin = n - test_size
    if first_origin - window < 0:
        raise ValueError(
            f"not enough history: first origin {first_origin} needs {window} prior observations"
        )
    scaled_own, scaled_sibs = _scaled_inputs(own, siblings, include_dual)
    origins = np.arange(first_origin, n)
    predictions = np.empty(test_size)
    provenance: list[tuple[int, int]] = []

    shared_result = None
    if not retrain_per_origin:
        lo = first_origin - window
        sibs = None if scaled_sibs is None else tuple(s[lo:first_origin] for s in scaled_sibs)
        samples = build_supervised(
            scaled_own[lo:first_origin], sibs, lag=lag, include_dual=include_dual
        )
        shared_result = train(samples, cfg)

    for k, origin in enumerate(origins):
        if retrain_per_origin:
            lo = origin - window
            sibs = None if scaled_sibs is None else tuple(s[lo:origin] for s in scaled_sibs)
            samples = build_supervised(
                scaled_own[lo:origin], sibs, lag=lag, include_dual=include_dual
            )
            origin_cfg = replace(cfg, seed=child_seed(cfg.seed, f"origin:{origin}"))
            result = train(samples, origin_cfg)
            provenance.append((lo, int(origin)))
        else:
            result = shared_result
            provenance.append((first_origin - window, first_origin))
        query = _query_window(scaled_own, scaled_sibs, origin, lag, include_dual)
        predictions[k] = unscale(predict(result.params, query))

    regime = RegimeSpec(
        kind="rolling",
        test_size=test_size,
        window=window,
        retrain_per_origin=retrain_per_origin,
    )
    return ForecastRun(
        ticker=ticker,
        lag=lag,
        include_dual=include_dual,
        regime=regime,
        seed=cfg.seed,
        predictions=predictions,
        actuals=own[origins],
        origins=origins,
        provenance=tuple(provenance),
        dates=None if dates is None else tuple(dates[i] for i in origins),
    )
