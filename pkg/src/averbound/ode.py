"""Adaptive explicit Runge-Kutta 4(5) integrator with dense output.

Dormand-Prince coefficients with the FSAL property, proportional-integral
step-size control, and an optional stop predicate.  When the predicate
becomes true at an accepted step, the crossing time is localized by
bisection on the dense output and the trajectory is truncated there.

The integrator is deterministic: identical inputs produce bitwise-identical
trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

__all__ = ["Status", "IvpProblem", "Trajectory", "integrate", "sample"]

# Dormand-Prince 5(4) stage coefficients.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A3 = np.array([3 / 40, 9 / 40])
_A4 = np.array([44 / 45, -56 / 15, 32 / 9])
_A5 = np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729])
_A6 = np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the propagating and the embedded weights (k2 drops out).
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
               22 / 525, -1 / 40])

_SAFETY = 0.9
_BETA = 0.04                  # integral gain of the PI controller
_EXPO = 0.2 - 0.75 * _BETA    # proportional exponent
_FAC_MIN = 0.2                # largest allowed step shrink factor is 1/5
_FAC_MAX = 10.0               # largest allowed step growth factor
_HMIN_REL = 1e-14             # step underflow threshold, relative to the span
_STOP_REL = 1e-10             # relative localization width for stop times
_STOP_BISECTIONS = 40

_RHS_ERRORS = (ArithmeticError, ValueError)


class Status(str, Enum):
    COMPLETED = "completed"
    STOPPED = "stopped_by_predicate"
    STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class IvpProblem:
    """An explicit initial-value problem y' = rhs(t, y) on [t0, t_end]."""

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    y0: np.ndarray
    t_end: float

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if y0.shape != (self.dimension,):
            raise ValueError(f"y0 must have shape ({self.dimension},)")
        object.__setattr__(self, "y0", y0)
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")


def _hermite(t, t0, t1, y0, y1, f0, f1):
    """Cubic Hermite interpolant on [t0, t1] with node values and slopes."""
    h = t1 - t0
    x = (t - t0) / h
    x2 = x * x
    x3 = x2 * x
    return ((2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * h * f0
            + (-2 * x3 + 3 * x2) * y1 + (x3 - x2) * h * f1)


def _hermite_slope(t, t0, t1, y0, y1, f0, f1):
    h = t1 - t0
    x = (t - t0) / h
    return ((6 * x * x - 6 * x) * (y0 - y1) / h + (3 * x * x - 4 * x + 1) * f0
            + (3 * x * x - 2 * x) * f1)


class CubicSampler:
    """Stateful dense-output evaluator for monotone-ish query sequences.

    Precomputes the per-interval cubic coefficients once and walks a cursor
    between calls, so repeated nearby queries cost a few array operations.
    """

    __slots__ = ("times", "_tlist", "_h", "_c0", "_c1", "_c2", "_c3",
                 "_idx", "_last", "_dim")

    def __init__(self, traj: "Trajectory"):
        t = traj.times
        y = traj.states
        f = traj.derivs
        h = np.diff(t)[:, None]
        y0, y1 = y[:-1], y[1:]
        f0, f1 = f[:-1], f[1:]
        self.times = t
        self._tlist = t.tolist()
        self._h = (h[:, 0]).tolist()
        # plain-float coefficient rows: cheap per-component Horner evaluation
        self._c0 = y0.tolist()
        self._c1 = (h * f0).tolist()
        self._c2 = (3 * (y1 - y0) - h * (2 * f0 + f1)).tolist()
        self._c3 = (2 * (y0 - y1) + h * (f0 + f1)).tolist()
        self._idx = 0
        self._last = len(t) - 2
        self._dim = y.shape[1]

    def _locate(self, t: float) -> int:
        times = self._tlist
        i = self._idx
        if t >= times[i]:
            last = self._last
            while i < last and t > times[i + 1]:
                i += 1
        else:
            while i > 0 and t < times[i]:
                i -= 1
        self._idx = i
        return i

    def __call__(self, t: float) -> np.ndarray:
        i = self._locate(t)
        s = (t - self._tlist[i]) / self._h[i]
        c0, c1, c2, c3 = self._c0[i], self._c1[i], self._c2[i], self._c3[i]
        return np.array([((c3[k] * s + c2[k]) * s + c1[k]) * s + c0[k]
                         for k in range(self._dim)])

    def value1(self, t: float) -> float:
        """First state component as a plain float."""
        i = self._locate(t)
        s = (t - self._tlist[i]) / self._h[i]
        return (((self._c3[i][0] * s + self._c2[i][0]) * s
                 + self._c1[i][0]) * s + self._c0[i][0])

    def into(self, t: float, out: np.ndarray, count: int) -> None:
        """Write the first ``count`` interpolated components into ``out``."""
        i = self._locate(t)
        s = (t - self._tlist[i]) / self._h[i]
        c0, c1, c2, c3 = self._c0[i], self._c1[i], self._c2[i], self._c3[i]
        for k in range(count):
            out[k] = ((c3[k] * s + c2[k]) * s + c1[k]) * s + c0[k]


@dataclass
class Trajectory:
    """Accepted integration grid with node derivatives for dense output."""

    times: np.ndarray          # (n,), strictly increasing
    states: np.ndarray         # (n, dim)
    derivs: np.ndarray         # (n, dim), rhs at the nodes
    status: Status
    stop_time: Optional[float] = None

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def sample(self, t: float) -> np.ndarray:
        """Dense-output state at time t inside the covered span.

        At a stored node this returns exactly the stored state.
        """
        times = self.times
        t0, t1 = times[0], times[-1]
        slack = 1e-12 * max(1.0, abs(t0), abs(t1))
        if t < t0 - slack or t > t1 + slack:
            raise ValueError(f"sample time {t} outside trajectory span [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        idx = int(np.searchsorted(times, t, side="right") - 1)
        if idx >= len(times) - 1:
            return self.states[-1].copy()
        if t == times[idx]:
            return self.states[idx].copy()
        return _hermite(t, times[idx], times[idx + 1], self.states[idx],
                        self.states[idx + 1], self.derivs[idx], self.derivs[idx + 1])

    def sample_many(self, ts) -> np.ndarray:
        return np.array([self.sample(t) for t in np.asarray(ts, dtype=float)])

    def sampler(self) -> CubicSampler:
        """Cursor-based dense-output evaluator for hot loops."""
        return CubicSampler(self)


def sample(traj: Trajectory, t: float) -> np.ndarray:
    """Dense-output state of ``traj`` at time ``t``."""
    return traj.sample(t)


def _initial_step(rhs, t0, y0, f0, t_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(t0 + h0, y1), dtype=float)
    d2 = float(np.max(np.abs(f1 - f0) / scale)) / h0
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100 * h0, h1, t_end - t0)


def integrate(problem: IvpProblem, rtol: float = 1e-9, atol: float = 1e-12,
              stop: Optional[Callable[[float, np.ndarray], bool]] = None,
              max_steps: int = 10_000_000,
              first_step: Optional[float] = None) -> Trajectory:
    """Integrate ``problem`` adaptively from t0 to t_end.

    The per-step error estimate is kept below atol + rtol*|state| in each
    component.  If ``stop`` is given it is evaluated at every accepted node;
    the first node where it holds ends the run, with the crossing localized
    on the dense output of the final step.  Failure modes: step-size
    underflow below 1e-14 times the span, or ``max_steps`` step attempts.
    Exceptions and non-finite values from the right side make the step
    retry at half size rather than abort.
    """
    rhs = problem.rhs
    t_end = problem.t_end
    t = problem.t0
    y = problem.y0.copy()
    f = np.asarray(rhs(t, y), dtype=float)
    if f.shape != (problem.dimension,):
        raise ValueError(f"rhs must return shape ({problem.dimension},), "
                         f"got {f.shape}")
    if stop is not None and stop(t, y):
        raise ValueError("stop predicate already true at the initial state")

    span = t_end - problem.t0
    h_min = _HMIN_REL * span
    if first_step is not None and first_step > 0.0:
        h = min(first_step, span)
    else:
        h = _initial_step(rhs, t, y, f, t_end, rtol, atol)

    times = [t]
    states = [y.copy()]
    derivs = [f.copy()]
    fac_old = 1e-4
    just_rejected = False
    steps = 0
    status = Status.COMPLETED
    stop_time = None

    # Work buffers reused across steps; the state handed to rhs is one of
    # these, so rhs must not retain references between calls.
    dim = problem.dimension
    kmat = np.empty((7, dim))
    yt = np.empty(dim)
    acc = np.empty(dim)
    k2v, k3v, k4v, k5v, k6v = (kmat[:2], kmat[:3], kmat[:4], kmat[:5], kmat[:6])
    a3_h, a4_h, a5_h, a6_h = (np.empty(2), np.empty(3), np.empty(4), np.empty(5))
    b_h, e_h = np.empty(6), np.empty(7)

    while t < t_end:
        if steps >= max_steps or h < h_min:
            status = Status.STEP_FAILURE
            break
        h = min(h, t_end - t)
        steps += 1

        try:
            kmat[0] = f
            np.multiply(kmat[0], _A21 * h, out=yt)
            yt += y
            kmat[1] = rhs(t + _C2 * h, yt)
            np.multiply(_A3, h, out=a3_h)
            np.dot(a3_h, k2v, out=yt)
            yt += y
            kmat[2] = rhs(t + _C3 * h, yt)
            np.multiply(_A4, h, out=a4_h)
            np.dot(a4_h, k3v, out=yt)
            yt += y
            kmat[3] = rhs(t + _C4 * h, yt)
            np.multiply(_A5, h, out=a5_h)
            np.dot(a5_h, k4v, out=yt)
            yt += y
            kmat[4] = rhs(t + _C5 * h, yt)
            np.multiply(_A6, h, out=a6_h)
            np.dot(a6_h, k5v, out=yt)
            yt += y
            kmat[5] = rhs(t + h, yt)
            np.multiply(_B, h, out=b_h)
            np.dot(b_h, k6v, out=acc)
            acc += y
            y_new = acc.copy()
            t_new = t + h
            kmat[6] = rhs(t_new, y_new)
            np.multiply(_E, h, out=e_h)
            np.dot(e_h, kmat, out=acc)
            np.abs(acc, out=acc)
            np.abs(y, out=yt)
            scale = np.abs(y_new)
            np.maximum(scale, yt, out=scale)
            scale *= rtol
            scale += atol
            acc /= scale
            err = float(acc.max())
        except _RHS_ERRORS:
            err = float("nan")

        if not err <= 1.0:     # rejects NaN as well
            if np.isnan(err):
                h *= 0.5
            else:
                h = h / min(1 / _FAC_MIN, (err ** _EXPO) / _SAFETY)
            just_rejected = True
            continue
        if not np.all(np.isfinite(y_new)):
            h *= 0.5
            just_rejected = True
            continue

        f_new = kmat[6].copy()   # FSAL stage sits at (t_new, y_new)
        times.append(t_new)
        states.append(y_new)
        derivs.append(f_new)

        if stop is not None and _safe_stop(stop, t_new, y_new):
            stop_time, y_stop, f_stop = _localize_stop(
                stop, t, t_new, y, y_new, f, f_new)
            times[-1] = stop_time
            states[-1] = y_stop
            derivs[-1] = f_stop
            status = Status.STOPPED
            break

        # PI controller (accepted step).
        fac = (err ** _EXPO) / (fac_old ** _BETA) if err > 0.0 else 1 / _FAC_MAX
        fac = max(1 / _FAC_MAX, min(1 / _FAC_MIN, fac / _SAFETY))
        if just_rejected:
            fac = max(fac, 1.0)   # no growth right after a rejection
        h = h / fac
        fac_old = max(err, 1e-4)
        just_rejected = False
        t = t_new
        y = y_new
        f = f_new

    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        derivs=np.asarray(derivs, dtype=float),
        status=status,
        stop_time=stop_time,
    )


def _safe_stop(stop, t, y) -> bool:
    try:
        return bool(stop(t, y))
    except _RHS_ERRORS:
        return True


def _localize_stop(stop, t0, t1, y0, y1, f0, f1):
    """Bisect the final step's dense output for the earliest stop time."""
    a, b = t0, t1
    for _ in range(_STOP_BISECTIONS):
        if (b - a) <= _STOP_REL * max(1.0, abs(b)):
            break
        mid = 0.5 * (a + b)
        y_mid = _hermite(mid, t0, t1, y0, y1, f0, f1)
        if _safe_stop(stop, mid, y_mid):
            b = mid
        else:
            a = mid
    y_stop = _hermite(b, t0, t1, y0, y1, f0, f1)
    f_stop = _hermite_slope(b, t0, t1, y0, y1, f0, f1)
    return b, y_stop, f_stop
