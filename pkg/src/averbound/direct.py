"""Direct fast-time integration of the averaging error.

Integrates the exact evolution of the scaled error L(t) = (I(t) - J(eps*t))/eps
and the angle against a precomputed averaged trajectory:

    dL/dt     = f(I, Theta) - fbar(J(eps*t)),                      L(0) = 0
    dTheta/dt = omega(I) + eps * g(I, Theta),        I := J(eps*t) + eps*L

The averaged actions are sampled from the slow trajectory's dense output.
This is the expensive comparison run used to validate the certified bound;
it honours a wall-clock budget and flags runs cut short by it.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import ode
from .model import AuxiliaryBundle, SystemSpec

__all__ = ["DirectTrajectory", "run_direct", "envelope"]

_DEFAULT_BUDGET_S = 240.0
_BUDGET_CHUNKS = 256


@dataclass
class DirectTrajectory:
    """Fast-time grid of the scaled error L and the (unreduced) angle."""

    d: int
    eps: float
    traj: ode.Trajectory       # state layout [L_1..L_d, Theta]
    budget_exceeded: bool
    wall_time_s: float

    @property
    def t(self) -> np.ndarray:
        return self.traj.times

    @property
    def l(self) -> np.ndarray:
        return self.traj.states[:, :self.d]

    @property
    def theta(self) -> np.ndarray:
        return self.traj.states[:, self.d]

    @property
    def abs_l(self) -> np.ndarray:
        return np.sqrt(np.sum(self.l * self.l, axis=1))

    @property
    def status(self) -> ode.Status:
        return self.traj.status

    def sample_l(self, t: float) -> np.ndarray:
        return self.traj.sample(t)[:self.d]

    def sample_theta(self, t: float) -> float:
        return float(self.traj.sample(t)[self.d])


def run_direct(spec: SystemSpec, aux: AuxiliaryBundle, avg_traj: ode.Trajectory,
               u: float, rtol: float = 1e-9, atol: float = 1e-12,
               time_budget: Optional[float] = _DEFAULT_BUDGET_S,
               max_steps: int = 50_000_000) -> DirectTrajectory:
    """Integrate the error system on [0, u/eps) against ``avg_traj``.

    ``avg_traj`` must span [0, u] in slow time with the averaged actions in
    its first d state components.  The run is split into chunks with the
    wall clock checked in between; exceeding ``time_budget`` seconds aborts
    with ``step_failure`` status and ``budget_exceeded`` set, keeping the
    partial trajectory.  Leaving the action domain stops the run with
    ``stopped_by_predicate``.
    """
    if not u > 0.0:
        raise ValueError("U must be positive")
    if avg_traj.t_final < u * (1.0 - 1e-12):
        raise ValueError("averaged trajectory does not span [0, U]")
    eps = spec.epsilon
    d = spec.d
    t_end = u / eps
    start = time.perf_counter()
    sample_avg = avg_traj.sampler()
    tau_max = avg_traj.t_final
    f_sys, g_sys, omega, fbar = spec.f, spec.g, spec.omega, aux.fbar
    # j/actions buffers are read by the system callables during the call
    # only, so reusing them across evaluations is safe.
    jbuf = np.empty(d)
    abuf = np.empty(d)

    if d == 1:
        value1 = sample_avg.value1

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            tau = eps * t
            j1 = value1(tau if tau < tau_max else tau_max)
            jbuf[0] = j1
            abuf[0] = j1 + eps * y[0]
            theta = y[1]
            out = np.empty(2)
            out[0] = f_sys(abuf, theta)[0] - fbar(jbuf)[0]
            out[1] = omega(abuf) + eps * g_sys(abuf, theta)
            return out
    else:
        sample_into = sample_avg.into

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            tau = eps * t
            sample_into(tau if tau < tau_max else tau_max, jbuf, d)
            np.multiply(y[:d], eps, out=abuf)
            np.add(abuf, jbuf, out=abuf)
            theta = y[d]
            out = np.empty(d + 1)
            out[:d] = f_sys(abuf, theta) - fbar(jbuf)
            out[d] = omega(abuf) + eps * g_sys(abuf, theta)
            return out

    def stop(t: float, y: np.ndarray) -> bool:
        tau = eps * t
        j = sample_avg(tau if tau < tau_max else tau_max)[:d]
        return not spec.in_domain(j + eps * y[:d])

    chunk = t_end / _BUDGET_CHUNKS
    y = np.concatenate([np.zeros(d), [spec.theta0]])
    t = 0.0
    h_warm = None
    pieces: List[ode.Trajectory] = []
    budget_hit = False
    status = ode.Status.COMPLETED
    while t < t_end:
        t_next = min(t + chunk, t_end)
        if t_end - t_next < 0.5 * chunk:
            t_next = t_end
        problem = ode.IvpProblem(dimension=d + 1, rhs=rhs, t0=t, y0=y,
                                 t_end=t_next)
        piece = ode.integrate(problem, rtol=rtol, atol=atol, stop=stop,
                              max_steps=max_steps, first_step=h_warm)
        pieces.append(piece)
        status = piece.status
        if piece.status is not ode.Status.COMPLETED:
            break
        t = piece.t_final
        y = piece.states[-1].copy()
        if len(piece.times) > 1:
            # last step is clipped to the chunk end; take the recent maximum
            h_warm = float(np.max(np.diff(piece.times[-6:])))
        if time_budget is not None and time.perf_counter() - start > time_budget:
            budget_hit = True
            status = ode.Status.STEP_FAILURE
            break

    merged = _concat(pieces, status)
    return DirectTrajectory(
        d=d,
        eps=eps,
        traj=merged,
        budget_exceeded=budget_hit,
        wall_time_s=time.perf_counter() - start,
    )


def _concat(pieces: Sequence[ode.Trajectory], status: ode.Status) -> ode.Trajectory:
    times = [pieces[0].times]
    states = [pieces[0].states]
    derivs = [pieces[0].derivs]
    for piece in pieces[1:]:
        times.append(piece.times[1:])
        states.append(piece.states[1:])
        derivs.append(piece.derivs[1:])
    stop_time = pieces[-1].stop_time
    return ode.Trajectory(
        times=np.concatenate(times),
        states=np.vstack(states),
        derivs=np.vstack(derivs),
        status=status,
        stop_time=stop_time,
    )


def envelope(dtraj: DirectTrajectory, window: float) -> List[Tuple[float, float]]:
    """Windowed peaks of |L| in slow time.

    Partitions the covered slow-time span into windows of the given width
    and returns, per nonempty window, the slow time of the largest |L|
    sample and its value.
    """
    if not window > 0.0:
        raise ValueError("window width must be positive")
    taus = dtraj.eps * dtraj.t
    if taus.size == 0:
        raise ValueError("empty trajectory")
    mags = dtraj.abs_l
    idx = np.floor(taus / window).astype(int)
    # a grid point sitting exactly on the right endpoint joins the last
    # full window instead of forming a one-sample bin
    span = float(taus[-1])
    last_full = max(int(np.ceil(span / window - 1e-12)) - 1, 0)
    np.minimum(idx, last_full, out=idx)
    out: List[Tuple[float, float]] = []
    for w in np.unique(idx):
        mask = idx == w
        local = np.argmax(mags[mask])
        out.append((float(taus[mask][local]), float(mags[mask][local])))
    return out
