"""Dual-class stock analytics toolkit.

Premium statistics over paired daily price series, Morlet wavelet coherence
with Monte-Carlo significance and phase lead-lag fields, and a from-scratch
LSTM forecaster with MECE and rolling training regimes.
"""

from .forecast import (
    ForecastRun,
    PriceScaleWarning,
    RegimeSpec,
    build_supervised,
    forecast_mece,
    forecast_rolling,
    scale_price,
    unscale,
)
from .lstm import (
    FeatureSample,
    LstmParams,
    LstmState,
    TrainConfig,
    TrainResult,
    TrainingDivergedError,
    backward,
    forward_sequence,
    lstm_cell_forward,
    predict,
    train,
)
from .metrics import MetricTriple, ReportGrid, assemble_grid, mae, mape, rmse
from .seeds import child_seed
from .significance import AR1Params, MonteCarloSpec, ar1_surrogate, fit_ar1, significance
from .svgplot import render_heatmap
from .timeseries import (
    CsvFormat,
    PremiumSeries,
    PriceSeries,
    ReturnSeries,
    SummaryStats,
    align_series,
    daily_returns,
    load_ohlc_csv,
    mid_price,
    premium_series,
    premium_summary,
)
from .wavelet import (
    CoherenceField,
    MorletSpec,
    ScaleGrid,
    Scaleogram,
    SmoothingSpec,
    coherence,
    cone_of_influence,
    cross_wavelet,
    cwt,
    morlet_mother,
    phase_field,
    smooth,
)

__version__ = "0.1.0"
