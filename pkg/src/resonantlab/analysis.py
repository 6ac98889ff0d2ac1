"""Time-series analytics for mode-intensity records: periodic beating
profiles, half-level crossings and multi-bump structure, bump-separation
symbols, tuple-activation itineraries, and log-log scaling fits.

All functions are pure: they read the series and return reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

HALF_LEVEL = 0.5
# hysteresis around the 1/2 level: a noisy plateau at 0.5 would otherwise
# register as many spurious crossings
HYSTERESIS = 0.02


class AnalysisError(ValueError):
    pass


@dataclass
class IntensitySeries:
    t: np.ndarray
    y: np.ndarray
    normalization: dict = field(default_factory=dict)  # delta, kappa, mass...

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.y.shape:
            raise AnalysisError("times and values must be 1-d and aligned")
        if np.any(np.diff(self.t) <= 0):
            raise AnalysisError("times must be strictly increasing")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.y))):
            raise AnalysisError("series contains non-finite entries")


# ------------------------------------------------------------ crossings

@dataclass
class Crossings:
    up: np.ndarray      # times where y crosses 1/2 going up
    down: np.ndarray


def half_crossings(series: IntensitySeries) -> Crossings:
    """All crossings of the 1/2 level, direction-labeled, with hysteresis
    deduplication and spline refinement of each crossing time."""
    t, y = series.t, series.y
    if y.min() > HALF_LEVEL - HYSTERESIS or y.max() < HALF_LEVEL + HYSTERESIS:
        raise AnalysisError("level 1/2 never crossed")
    spline = CubicSpline(t, y)

    def refine(i):
        # bracket between samples i and i+1, fall back to linear interp if
        # the spline wiggles out of the bracket
        a, b = t[i], t[i + 1]
        fa, fb = y[i] - HALF_LEVEL, y[i + 1] - HALF_LEVEL
        g = lambda x: spline(x) - HALF_LEVEL
        if g(a) * g(b) < 0:
            return brentq(g, a, b, xtol=1e-12)
        return a + (b - a) * fa / (fa - fb)

    up, down = [], []
    state = 1 if y[0] > HALF_LEVEL else -1  # which side we are armed on
    for i in range(len(y) - 1):
        if state <= 0 and y[i + 1] > HALF_LEVEL + HYSTERESIS:
            j = i
            while y[j] > HALF_LEVEL:
                j -= 1
            up.append(refine(j))
            state = 1
        elif state >= 0 and y[i + 1] < HALF_LEVEL - HYSTERESIS:
            j = i
            while y[j] < HALF_LEVEL:
                j -= 1
            down.append(refine(j))
            state = -1
    up, down = np.array(up), np.array(down)
    merged = sorted([(x, "u") for x in up] + [(x, "d") for x in down])
    for (a, la), (b, lb) in zip(merged, merged[1:]):
        if la == lb:
            raise AnalysisError("crossing directions do not alternate")
    return Crossings(up, down)


@dataclass
class BumpReport:
    sup_ok: list[bool]
    inf_ok: list[bool]
    sups: list[float]
    infs: list[float]

    @property
    def all_ok(self) -> bool:
        return all(self.sup_ok) and all(self.inf_ok)


def bump_check(series: IntensitySeries, crossings: Crossings,
               eps: float) -> BumpReport:
    """Per bump (t_j, tbar_j): does the intensity reach 1 - eps?  Per quiet
    window (tbar_j, t_{j+1}): does it drop to eps?"""
    t, y = series.t, series.y

    def extremum(a, b, kind):
        m = (t >= a) & (t <= b)
        if not m.any():
            return float(y[np.argmin(np.abs(t - 0.5 * (a + b)))])
        return float(y[m].max() if kind == "max" else y[m].min())

    sup_ok, inf_ok, sups, infs = [], [], [], []
    for tj in crossings.up:
        later = crossings.down[crossings.down > tj]
        if not len(later):
            break
        s = extremum(tj, later[0], "max")
        sups.append(s)
        sup_ok.append(s >= 1 - eps)
    for tbar in crossings.down:
        later = crossings.up[crossings.up > tbar]
        if not len(later):
            break
        v = extremum(tbar, later[0], "min")
        infs.append(v)
        inf_ok.append(v <= eps)
    return BumpReport(sup_ok, inf_ok, sups, infs)


# ------------------------------------------------------------ beating profile

@dataclass
class QExtraction:
    period: float
    phase: np.ndarray     # uniform grid on [0, period)
    profile: np.ndarray
    residual: float
    min_q: float
    max_q: float
    t_ref: float = 0.0    # profile phase is (t - t_ref) mod period

    def evaluate(self, t) -> np.ndarray:
        grid = np.append(self.phase, self.period)
        vals = np.append(self.profile, self.profile[0])
        return CubicSpline(grid, vals, bc_type="periodic")(
            np.mod(np.asarray(t) - self.t_ref, self.period))


def _fold_residual(series: IntensitySeries, T: float, n_grid: int,
                   spline: CubicSpline) -> tuple[np.ndarray, float]:
    t0, t1 = series.t[0], series.t[-1]
    grid = np.linspace(0.0, T, n_grid, endpoint=False)
    # pointwise median over full periods, robust to transients
    rows = []
    k = 0
    while t0 + (k + 1) * T <= t1 + 1e-12 * T:
        rows.append(spline(t0 + k * T + grid))
        k += 1
    if not rows:
        rows = [spline(np.clip(t0 + grid, t0, t1))]
    profile = np.median(np.array(rows), axis=0)
    q = CubicSpline(np.append(grid, T), np.append(profile, profile[0]),
                    bc_type="periodic")(np.mod(series.t - t0, T))
    return profile, float(np.max(np.abs(series.y - q)))


def extract_Q(series: IntensitySeries, T_hint: Optional[float] = None,
              residual_threshold: float = 0.05,
              n_grid: int = 1024) -> QExtraction:
    """Estimate the beating period and the phase-folded profile Q.

    The period comes from successive upward half-crossings (or a supplied
    hint, refined by minimizing the fold residual); a residual above the
    threshold means the series is not periodic and is reported as an error
    rather than smoothed over."""
    if T_hint is None:
        try:
            cr = half_crossings(series)
        except AnalysisError as e:
            raise AnalysisError(f"no periodicity detected: {e}") from e
        if len(cr.up) < 2:
            raise AnalysisError("no periodicity detected: fewer than two bumps")
        T0 = float(np.median(np.diff(cr.up)))
    else:
        T0 = float(T_hint)
    span = series.t[-1] - series.t[0]
    if span < 3 * T0:
        raise AnalysisError("series spans fewer than three putative periods")
    spline = CubicSpline(series.t, series.y)
    res = minimize_scalar(lambda T: _fold_residual(series, T, 256, spline)[1],
                          bounds=(0.97 * T0, 1.03 * T0), method="bounded",
                          options={"xatol": T0 * 1e-9})
    T = float(res.x)
    profile, residual = _fold_residual(series, T, n_grid, spline)
    if residual > residual_threshold:
        raise AnalysisError(
            f"no periodicity detected: fold residual {residual:.3e} exceeds "
            f"threshold {residual_threshold:.3e}")
    return QExtraction(T, np.linspace(0.0, T, n_grid, endpoint=False), profile,
                       residual, float(profile.min()), float(profile.max()),
                       t_ref=float(series.t[0]))


# ------------------------------------------------------------ symbols

@dataclass
class SymbolSequence:
    m: np.ndarray        # integer bump-separation symbols
    theta: np.ndarray    # fractional parts in [0, 1)


def symbol_times(crossings: Crossings, T: float, delta: float) -> SymbolSequence:
    """Quantized bump separations: gap_j = delta^{-2} T (m_j + theta_j)."""
    if len(crossings.up) < 2:
        raise AnalysisError("need at least two upward crossings")
    quantum = T / delta ** 2
    gaps = np.diff(crossings.up) / quantum
    m = np.floor(gaps).astype(int)
    return SymbolSequence(m, gaps - m)


# ------------------------------------------------------------ itineraries

@dataclass
class Itinerary:
    beating: list[tuple[float, float, int]]   # (alpha_p, beta_p, active tuple)
    transitions: list[tuple[float, float]]
    diagnostics: dict = field(default_factory=dict)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(lbl for _, _, lbl in self.beating)


def activation_itinerary(all_series: list[IntensitySeries], eps: float,
                         min_length: Optional[float] = None) -> Itinerary:
    """Partition time into beating intervals (exactly one tuple above eps)
    separated by transitions.  Beating intervals shorter than min_length
    (default |ln eps|) are folded into the neighboring transition."""
    if not all_series:
        raise AnalysisError("no series given")
    t = all_series[0].t
    for s in all_series[1:]:
        if len(s.t) != len(t) or np.max(np.abs(s.t - t)) > 0:
            raise AnalysisError("series are not on a common time grid")
    if min_length is None:
        min_length = abs(math.log(eps))
    Y = np.array([s.y for s in all_series])
    active = Y > eps
    counts = active.sum(axis=0)
    # tuple labels are 1-based; 0 marks transition samples
    label = np.where(counts == 1, active.argmax(axis=0) + 1, 0)

    runs = []
    start = 0
    for i in range(1, len(t) + 1):
        if i == len(t) or label[i] != label[start]:
            runs.append((t[start], t[i - 1], int(label[start])))
            start = i
    beating = [(a, b, l) for a, b, l in runs
               if l > 0 and (b - a) >= min_length]
    if not beating:
        return Itinerary([], [(float(t[0]), float(t[-1]))],
                         {"note": "no beating interval above minimum length"})
    for (a1, b1, l1), (a2, b2, l2) in zip(beating, beating[1:]):
        if l1 == l2:
            raise AnalysisError(
                "no valid partition: tuple %d re-activates without a "
                "transition to another tuple" % l1)
    transitions = [(b1, a2) for (_, b1, _), (a2, _, _) in
                   zip(beating, beating[1:])]
    # a genuine hand-off drains the outgoing tuple from near-full intensity
    hand_off = []
    for (a1, b1, l1), (ta, tb) in zip(beating, transitions):
        m = (t >= a1) & (t <= tb)
        hand_off.append(bool(np.max(Y[l1 - 1][m]) >= 1 - eps) if m.any() else False)
    return Itinerary(beating, transitions, {"hand_off_reached_full": hand_off})


# ------------------------------------------------------------ scaling

@dataclass
class ScalingFit:
    exponent: float
    prefactor: float
    residual: float       # max |log(metric) - fit| over the points


def scaling_fit(pairs: list[tuple[float, float]]) -> ScalingFit:
    """Least-squares slope of log(metric) against log(delta)."""
    if len(pairs) < 3:
        raise AnalysisError("need at least three (delta, metric) pairs")
    d = np.array([p[0] for p in pairs], dtype=float)
    m = np.array([p[1] for p in pairs], dtype=float)
    if np.any(m <= 0) or np.any(d <= 0):
        raise AnalysisError("metrics and scales must be positive")
    if d.max() / d.min() < 4:
        raise AnalysisError("delta values must span at least a factor 4")
    slope, intercept = np.polyfit(np.log(d), np.log(m), 1)
    resid = float(np.max(np.abs(np.log(m) - (slope * np.log(d) + intercept))))
    return ScalingFit(float(slope), float(math.exp(intercept)), resid)
