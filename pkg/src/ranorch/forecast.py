"""Pluggable many-to-one predictors, traffic-mix forecasting, adaptive
thresholds, and binary state-signature encoding for intent validation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

METRIC_LABELS = ("traffic_load", "packet_loss", "power", "traffic_mix")


class PredictorError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesWindow:
    values: np.ndarray
    metric: str

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise PredictorError("window must hold at least 2 observations")
        if self.metric not in METRIC_LABELS:
            raise PredictorError(f"unknown metric label {self.metric!r}")


# ------------------------------------------------------------------ predictors


class EwmaPredictor:
    """Exponentially weighted moving average; alpha=1 reduces to last value."""

    def __init__(self, alpha: float = 0.3):
        if not 0 < alpha <= 1:
            raise PredictorError("alpha must be in (0, 1]")
        self.alpha = alpha

    def predict(self, values: np.ndarray) -> float:
        level = float(values[0])
        for v in values[1:]:
            level = self.alpha * float(v) + (1 - self.alpha) * level
        return level


class SeasonalNaivePredictor:
    """Repeats the value one period back."""

    def __init__(self, period: int = 24):
        if period < 1:
            raise PredictorError("period must be >= 1")
        self.period = period

    def predict(self, values: np.ndarray) -> float:
        if len(values) < self.period:
            return float(values[-1])
        return float(values[len(values) - self.period])


class ArPredictor:
    """AR(p) fitted by least squares; must be fitted before predicting."""

    def __init__(self, order: int = 2):
        if order < 1:
            raise PredictorError("order must be >= 1")
        self.order = order
        self.coef: np.ndarray | None = None
        self.intercept = 0.0

    def fit(self, series: np.ndarray) -> "ArPredictor":
        series = np.asarray(series, dtype=np.float64)
        p = self.order
        if len(series) < p + 2:
            raise PredictorError("series too short to fit AR model")
        X = np.column_stack([series[p - k - 1:len(series) - k - 1] for k in range(p)])
        X = np.column_stack([X, np.ones(len(X))])
        y = series[p:]
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        self.coef = beta[:-1]
        self.intercept = float(beta[-1])
        return self

    def predict(self, values: np.ndarray) -> float:
        if self.coef is None:
            raise PredictorError("AR model is not fitted")
        p = self.order
        if len(values) < p:
            raise PredictorError("window shorter than AR order")
        lags = np.asarray(values[-p:], dtype=np.float64)[::-1]
        return float(np.dot(self.coef, lags) + self.intercept)


# Routing table: every metric label maps to exactly one predictor id. Mirrors
# the per-metric model selection of the orchestration layer: bursty mix series
# get the fast smoother, diurnal load the seasonal model, loss/power the AR fit.
DEFAULT_ROUTING = {
    "traffic_mix": "ewma",
    "traffic_load": "seasonal",
    "packet_loss": "ar",
    "power": "ewma",
}


class PredictorBank:
    """Fitted predictors keyed by id; immutable after fitting."""

    def __init__(self, routing: dict[str, str] | None = None):
        self.routing = dict(routing or DEFAULT_ROUTING)
        missing = set(METRIC_LABELS) - set(self.routing)
        if missing:
            raise PredictorError(f"routing must cover every metric: missing {missing}")
        self.predictors: dict[str, object] = {
            "ewma": EwmaPredictor(alpha=0.3),
            "seasonal": SeasonalNaivePredictor(period=24),
            "ar": ArPredictor(order=2),
        }

    def fit(self, metric: str, history: np.ndarray) -> None:
        predictor = self.predictors[self.routing[metric]]
        if isinstance(predictor, ArPredictor):
            predictor.fit(history)

    def predict(self, window: SeriesWindow) -> float:
        predictor = self.predictors[self.routing[window.metric]]
        value = predictor.predict(np.asarray(window.values, dtype=np.float64))
        if not math.isfinite(value):
            raise PredictorError("non-finite prediction")
        return value


def predict(window: SeriesWindow, predictor) -> float:
    """Single-shot prediction with an explicit predictor instance."""
    value = predictor.predict(np.asarray(window.values, dtype=np.float64))
    if not math.isfinite(value):
        raise PredictorError("non-finite prediction")
    return value


# ------------------------------------------------------------------ traffic mix


@dataclass(frozen=True)
class MixForecast:
    """Per-step class-share rows on the simplex, horizon H."""

    shares: np.ndarray   # (H, C)

    def __post_init__(self) -> None:
        if self.shares.ndim != 2:
            raise PredictorError("shares must be (horizon, classes)")
        if np.any(self.shares < -1e-12) or np.any(self.shares > 1 + 1e-12):
            raise PredictorError("shares must lie in [0, 1]")
        if np.any(np.abs(self.shares.sum(axis=1) - 1.0) > 1e-9):
            raise PredictorError("each row must sum to 1")

    @property
    def horizon(self) -> int:
        return self.shares.shape[0]


def forecast_mix(byte_volumes: np.ndarray, horizon: int, alpha: float = 0.5) -> MixForecast:
    """EWMA of per-class byte shares, repeated over the horizon.

    byte_volumes: (W, C) nonnegative per-step class volumes. All-zero windows
    forecast the uniform distribution.
    """
    vols = np.asarray(byte_volumes, dtype=np.float64)
    if vols.ndim != 2 or vols.shape[0] < 1:
        raise PredictorError("need a (window, classes) volume matrix")
    if np.any(vols < 0):
        raise PredictorError("byte volumes must be nonnegative")
    C = vols.shape[1]
    totals = vols.sum(axis=1)
    level = None
    for t in range(vols.shape[0]):
        if totals[t] <= 0:
            continue
        share = vols[t] / totals[t]
        level = share if level is None else alpha * share + (1 - alpha) * level
    if level is None:
        level = np.full(C, 1.0 / C)
    level = level / level.sum()
    return MixForecast(np.tile(level, (horizon, 1)))


def surge_time_to_peak(load: np.ndarray, prominence: float = 0.2, lookahead: int = 24) -> float:
    """Steps until the rolling-max peak detector expects the next surge.

    Uses the recent inter-peak spacing of prominent rolling-max peaks;
    returns lookahead when no peak structure is visible.
    """
    load = np.asarray(load, dtype=np.float64)
    if len(load) < 3:
        return float(lookahead)
    base = float(np.median(load))
    threshold = base * (1.0 + prominence)
    peaks = [
        i for i in range(1, len(load) - 1)
        if load[i] >= threshold and load[i] >= load[i - 1] and load[i] >= load[i + 1]
    ]
    if len(peaks) < 2:
        return float(lookahead)
    spacing = float(np.mean(np.diff(peaks)))
    since_last = len(load) - 1 - peaks[-1]
    return max(spacing - since_last, 0.0)


# ------------------------------------------------------------------ thresholds


@dataclass
class ThresholdPair:
    upper: float | None = None
    lower: float | None = None
    xi_a: float = 0.0
    xi_b: float = 0.0

    @property
    def consistent(self) -> bool:
        """True unless both bounds are set with lower above upper."""
        if self.upper is None or self.lower is None:
            return True
        return self.lower <= self.upper


def default_xi(kpi_series: np.ndarray) -> float:
    """Significance threshold from historical fluctuation statistics."""
    kpi_series = np.asarray(kpi_series, dtype=np.float64)
    prev = kpi_series[:-1]
    valid = prev != 0
    if not np.any(valid):
        return 0.0
    rel = np.abs((kpi_series[1:][valid] - prev[valid]) / prev[valid])
    return float(rel.mean() + 2.0 * rel.std())


def identify_thresholds(
    history: list[tuple[float, float, float]],
    increasing: bool,
    decreasing: bool,
    xi_a: float,
    xi_b: float,
) -> ThresholdPair:
    """Scan (M, KPI_a, KPI_b) tuples; last qualifying step wins.

    Sets the upper bound when an increasing-relationship KPI jumps by more
    than its significance threshold, the lower bound on the decreasing case.
    Steps with a zero previous KPI value are skipped with a diagnostic.
    """
    if len(history) < 2:
        raise ValueError("history must hold at least 2 tuples")
    upper: float | None = None
    lower: float | None = None
    for t in range(1, len(history)):
        m_t, a_t, b_t = history[t]
        _, a_prev, b_prev = history[t - 1]
        if a_prev == 0 or b_prev == 0:
            log.debug("threshold scan: zero previous KPI at step %d, skipped", t + 1)
            continue
        da = (a_t - a_prev) / a_prev
        db = (b_t - b_prev) / b_prev
        if increasing and (da > xi_a or db > xi_b):
            upper = m_t
        if decreasing and (da < -xi_a or db < -xi_b):
            lower = m_t
    return ThresholdPair(upper=upper, lower=lower, xi_a=xi_a, xi_b=xi_b)


# ------------------------------------------------------------------ signature


@dataclass(frozen=True)
class StateSignature:
    """Out-of-band bits for (load, loss, power) predictions."""

    bits: tuple[int, int, int]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("signature entries must be 0/1 bits")

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


SIGNATURE_METRICS = ("traffic_load", "packet_loss", "power")


def encode_state(predictions: dict[str, float],
                 thresholds: dict[str, ThresholdPair]) -> StateSignature:
    """Bit = 1 iff the prediction falls outside its closed [lower, upper] band.

    Unset bounds act as infinities.
    """
    bits = []
    for metric in SIGNATURE_METRICS:
        pred = predictions[metric]
        pair = thresholds.get(metric, ThresholdPair())
        lower = pair.lower if pair.lower is not None else -math.inf
        upper = pair.upper if pair.upper is not None else math.inf
        bits.append(0 if lower <= pred <= upper else 1)
    return StateSignature(tuple(bits))
