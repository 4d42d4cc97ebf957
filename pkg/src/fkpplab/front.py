"""Front position, speed and leading-edge decay measurements."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import InsufficientSamplesError, NoCrossingError
from .model import FrontTrace, ScalarField

DEFAULT_LEVEL = 0.5


def front_position(field: ScalarField, level: float = DEFAULT_LEVEL) -> float:
    """Rightmost downward crossing of ``level``, linearly interpolated."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return _rightmost_crossing(field.grid.x, np.asarray(field.values) - level, downward=True)


def _rightmost_crossing(x: np.ndarray, s: np.ndarray, downward: bool) -> float:
    if not downward:
        s = -s
    idx = np.nonzero((s[:-1] >= 0) & (s[1:] < 0))[0]
    if idx.size == 0:
        raise NoCrossingError("values never cross the requested level")
    i = idx[-1]
    frac = s[i] / (s[i] - s[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def front_trace(snapshots, level: float = DEFAULT_LEVEL, skip_initial: bool = True):
    """Front positions over a sequence of snapshots (``Trajectory`` or list)."""
    snaps = getattr(snapshots, "snapshots", snapshots)
    if skip_initial and snaps and snaps[0].time == 0.0:
        snaps = snaps[1:]
    times = [s.time for s in snaps]
    xs = [front_position(s, level) for s in snaps]
    return FrontTrace(level=level, times=np.array(times), positions=np.array(xs))


def front_speed(trace: FrontTrace, fit_window: float = 0.5, min_samples: int = 10):
    """Least-squares slope of x*(t) over the last ``fit_window`` fraction of samples.

    Returns ``(v_hat, stderr)``.
    """
    if not 0 < fit_window <= 1:
        raise ValueError(f"fit_window must be in (0, 1], got {fit_window}")
    n = len(trace.times)
    k = int(np.ceil(fit_window * n - 1e-9))
    if k < min_samples:
        raise InsufficientSamplesError(f"{k} samples in the fit window, need {min_samples}")
    t = np.asarray(trace.times[-k:], dtype=float)
    x = np.asarray(trace.positions[-k:], dtype=float)
    fit = stats.linregress(t, x)
    return float(fit.slope), float(fit.stderr)


def with_speed(trace: FrontTrace, fit_window: float = 0.5) -> FrontTrace:
    v, err = front_speed(trace, fit_window)
    return FrontTrace(trace.level, trace.times, trace.positions, v, err)


def decay_rate(field: ScalarField, rho_lo: float = 1e-8, rho_hi: float = 1e-3, min_nodes: int = 10) -> float:
    """-(slope of ln rho vs x) over nodes with rho in [rho_lo, rho_hi]."""
    rho = np.asarray(field.values)
    mask = (rho >= rho_lo) & (rho <= rho_hi)
    if mask.sum() < min_nodes:
        raise InsufficientSamplesError(
            f"only {int(mask.sum())} nodes with rho in [{rho_lo}, {rho_hi}], need {min_nodes}"
        )
    slope = np.polyfit(field.grid.x[mask], np.log(rho[mask]), 1)[0]
    return float(-slope)
