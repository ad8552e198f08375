"""Run time series: collection, invariant checks, regime classification."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import NonPositiveAmplitude, WindowTooShort

CSV_HEADER = ("time", "amp_u", "amp_v", "amp_w", "mass_u", "mass_v", "mass_w",
              "min_u", "min_v", "min_w", "heterogeneity")

REGIMES = ("trivial", "constant-nontrivial", "heterogeneous-stationary",
           "periodic", "unresolved")


@dataclass
class DiagnosticsSeries:
    """Per-output-time diagnostics of a run."""

    times: List[float] = field(default_factory=list)
    amp_u: List[float] = field(default_factory=list)
    amp_v: List[float] = field(default_factory=list)
    amp_w: List[float] = field(default_factory=list)
    mass_u: List[float] = field(default_factory=list)
    mass_v: List[float] = field(default_factory=list)
    mass_w: List[float] = field(default_factory=list)
    min_u: List[float] = field(default_factory=list)
    min_v: List[float] = field(default_factory=list)
    min_w: List[float] = field(default_factory=list)
    heterogeneity: List[float] = field(default_factory=list)
    extra_names: List[str] = field(default_factory=list)
    extras: List[List[float]] = field(default_factory=list)
    regime: str = "unresolved"

    def append_sample(self, t, amps, masses, mins, heterogeneity, extras=()):
        if self.times and t <= self.times[-1]:
            raise ValueError("sample times must be strictly increasing")
        self.times.append(float(t))
        self.amp_u.append(float(amps[0]))
        self.amp_v.append(float(amps[1]))
        self.amp_w.append(float(amps[2]))
        self.mass_u.append(float(masses[0]))
        self.mass_v.append(float(masses[1]))
        self.mass_w.append(float(masses[2]))
        self.min_u.append(float(mins[0]))
        self.min_v.append(float(mins[1]))
        self.min_w.append(float(mins[2]))
        self.heterogeneity.append(float(heterogeneity))
        self.extras.append(list(extras))

    def __len__(self):
        return len(self.times)

    def column(self, name):
        return np.asarray(getattr(self, name), dtype=np.float64)

    def amp(self, component):
        return self.column(f"amp_{component}")

    def to_csv(self, path):
        header = list(CSV_HEADER) + list(self.extra_names)
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for i in range(len(self.times)):
                row = [self.times[i], self.amp_u[i], self.amp_v[i],
                       self.amp_w[i], self.mass_u[i], self.mass_v[i],
                       self.mass_w[i], self.min_u[i], self.min_v[i],
                       self.min_w[i], self.heterogeneity[i]]
                row += self.extras[i]
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            extra_names = header[len(CSV_HEADER):]
            series = cls(extra_names=extra_names)
            for line in fh:
                vals = [float(x) for x in line.strip().split(",")]
                series.append_sample(
                    t=vals[0], amps=vals[1:4], masses=vals[4:7],
                    mins=vals[7:10], heterogeneity=vals[10],
                    extras=vals[11:])
        return series


# ---------------------------------------------------------------------------
# regime classification

def _windowed_slope(t, y, n_win):
    """Least-squares slope of y over each trailing window of n_win samples."""
    slopes = np.full(len(t), np.nan)
    for i in range(n_win - 1, len(t)):
        tt = t[i - n_win + 1:i + 1]
        yy = y[i - n_win + 1:i + 1]
        slopes[i] = np.polyfit(tt - tt[0], yy, 1)[0]
    return slopes


def transient_end(d: DiagnosticsSeries, window, slope_tol=1e-3):
    """Last time the windowed slope of amp_u exceeds slope_tol (in magnitude).

    The tolerance is relative: a slope counts as drift while the amplitude
    changes by more than ``slope_tol`` times the overall amplitude scale per
    time unit.  Returns the first sample time if the slope never exceeds the
    tolerance.
    """
    t = d.column("times")
    y = d.amp("u")
    if len(t) < 4:
        raise WindowTooShort("need at least 4 samples")
    dt = float(np.median(np.diff(t)))
    n_win = max(3, int(round(window / dt)))
    if n_win >= len(t):
        raise WindowTooShort("window longer than the series")
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        return float(t[0])
    slopes = _windowed_slope(t, y, n_win)
    exceeding = np.where(np.abs(slopes) > slope_tol * scale)[0]
    if exceeding.size == 0:
        return float(t[0])
    return float(t[exceeding[-1]])


def stabilization_time(d: DiagnosticsSeries, window, slope_tol=1e-3):
    """When every amplitude stops drifting.

    Applies the transient_end criterion to each of amp_u, amp_v, amp_w —
    each against its own amplitude scale — and returns the latest settling
    time.
    """
    t = d.column("times")
    if len(t) < 4:
        raise WindowTooShort("need at least 4 samples")
    dt = float(np.median(np.diff(t)))
    n_win = max(3, int(round(window / dt)))
    if n_win >= len(t):
        raise WindowTooShort("window longer than the series")
    settled = float(t[0])
    for comp in "uvw":
        y = d.amp(comp)
        scale = float(np.max(np.abs(y)))
        if scale == 0.0:
            continue
        slopes = _windowed_slope(t, y, n_win)
        exceeding = np.where(np.abs(slopes) > slope_tol * scale)[0]
        if exceeding.size:
            settled = max(settled, float(t[exceeding[-1]]))
    return settled


def _autocorr_secondary_peak(y, min_lag):
    """(best peak value, lag) of the autocorrelation at lag >= min_lag."""
    x = y - y.mean()
    denom = float(np.sum(x * x))
    if denom <= 0:
        return 0.0, 0
    n = len(x)
    best, best_lag = -np.inf, 0
    for lag in range(min_lag, n // 2):
        ac = float(np.sum(x[:-lag] * x[lag:])) / denom
        if ac > best:
            best, best_lag = ac, lag
    return best, best_lag


def classify_regime(d: DiagnosticsSeries, window, ubar=None, slope_tol=1e-3):
    """Classify the asymptotic regime of a run.

    ``window`` is in time units; the run must cover at least 2*window after
    the detected transient.  ``ubar`` (the trivial steady-state target level)
    enables the 'trivial' check.
    """
    t = d.column("times")
    if len(t) < 8:
        raise WindowTooShort("need at least 8 samples")
    if t[-1] - t[0] < 2 * window:
        raise WindowTooShort(
            f"series covers {t[-1] - t[0]:.3g} time units; "
            f"need {2 * window:.3g}")

    dt = float(np.median(np.diff(t)))
    n_win = max(4, int(round(window / dt)))
    last = slice(max(len(t) - n_win, 0), len(t))
    tail = t >= t[-1] - 2 * window   # settled portion used for periodicity

    amp_v_final = float(np.mean(d.amp("v")[last]))
    amp_u_final = float(np.mean(d.amp("u")[last]))
    if amp_v_final <= 1e-4 and ubar is not None \
            and abs(amp_u_final - ubar) <= 1e-3:
        return "trivial"

    def stationary(y):
        seg = y[last]
        return float(np.std(seg)) <= 1e-2 * abs(float(np.mean(seg))) + 1e-12

    het_final = float(np.mean(d.column("heterogeneity")[last]))
    if all(stationary(d.amp(c)) for c in "uvw"):
        if het_final <= 0.02:
            return "constant-nontrivial"
        return "heterogeneous-stationary"

    tt = t[tail]
    for c in "uvw":
        seg = d.amp(c)[tail]
        if float(np.std(seg)) <= 1e-6 * abs(float(np.mean(seg))):
            continue   # no oscillation to speak of in this component
        # a sustained drift over the tail means an unfinished transient, and
        # its autocorrelation would masquerade as a period
        trend = np.polyfit(tt - tt[0], seg, 1)[0]
        resid = seg - np.polyval(np.polyfit(tt - tt[0], seg, 1), tt - tt[0])
        if abs(trend) * (tt[-1] - tt[0]) > 2.0 * float(np.std(resid)):
            continue
        peak, _ = _autocorr_secondary_peak(seg, min_lag=4)
        if peak >= 0.8:
            return "periodic"
    return "unresolved"


# ---------------------------------------------------------------------------
# invariant verification

@dataclass(frozen=True)
class BoundsReport:
    passed: bool
    failing_components: tuple
    margin_u: float          # min over time of C1 - mass_u
    margin_v: float          # min over time of C2 - mass_v
    drift_w: float           # max over time of |mass_w - C3| / C3

    def summary(self):
        status = "pass" if self.passed else "fail"
        return (f"{status}: margin_u={self.margin_u:.6g} "
                f"margin_v={self.margin_v:.6g} drift_w={self.drift_w:.3e}"
                + ("" if self.passed
                   else f" failing={','.join(self.failing_components)}"))


def verify_bounds(d: DiagnosticsSeries, bounds):
    """Check mass bounds at every sample: mass_u <= C1, mass_v <= C2,
    |mass_w - C3|/C3 <= 1e-8.  A single violating sample fails the check."""
    C1, C2, C3 = bounds
    mu = d.column("mass_u")
    mv = d.column("mass_v")
    mw = d.column("mass_w")
    margin_u = float(np.min(C1 - mu))
    margin_v = float(np.min(C2 - mv))
    drift_w = float(np.max(np.abs(mw - C3)) / C3)
    failing = []
    if margin_u < 0:
        failing.append("u")
    if margin_v < 0:
        failing.append("v")
    if drift_w > 1e-8:
        failing.append("w")
    return BoundsReport(passed=not failing, failing_components=tuple(failing),
                        margin_u=margin_u, margin_v=margin_v, drift_w=drift_w)


def measured_growth_rate(d: DiagnosticsSeries, t0, t1, component="v"):
    """Least-squares slope of log amplitude over the time window [t0, t1]."""
    t = d.column("times")
    y = d.amp(component)
    sel = (t >= t0) & (t <= t1)
    if sel.sum() < 2:
        raise ValueError("fewer than two samples in [t0, t1]")
    if (y[sel] <= 0).any():
        raise NonPositiveAmplitude(
            f"amp_{component} not strictly positive on [{t0}, {t1}]")
    return float(np.polyfit(t[sel], np.log(y[sel]), 1)[0])
