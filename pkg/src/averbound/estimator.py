"""Certified error estimator for the averaging approximation.

Solves, in the slow time tau = eps*t, the coupled system for

* the averaged actions J (dJ/dtau = fbar(J)),
* the fundamental matrix R of the linearized averaged flow,
* its inhomogeneous companion K driven by pbar,
* the accumulated growth integral m,
* the certified bound n, with n(0) = ell0 the fixed point of the
  self-consistent level map ell -> offset_bound(tau=0, eps*ell).

A successful run certifies |I(t) - J(eps*t)| <= eps * n(eps*t) for
t in [0, U/eps); the run stops early (status ``domain_violation``) as soon
as one of the validity conditions

    0 < n < rho_hat(J)/eps,      d(offset)/dr (eps*n) < 1/eps

fails along the way.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import ode
from .model import (AuxiliaryBundle, BoundBundle, SystemSpec, frobenius)

__all__ = [
    "ContractionError",
    "NoConvergenceError",
    "SingularMatrixError",
    "WindowError",
    "ViolationKind",
    "EstimatorStatus",
    "ContractionWindow",
    "EstimatorTrajectory",
    "auto_window",
    "find_fixed_point",
    "assemble_slow_rhs",
    "run_estimator",
    "run_averaged",
    "analytic_crosscheck",
]

_COND_LIMIT = 1e12
REPORT_GRID_POINTS = 2048


class ContractionError(RuntimeError):
    """The supplied window fails a contraction precondition."""


class NoConvergenceError(RuntimeError):
    """Fixed-point iteration did not meet the tolerance within max_iter."""


class SingularMatrixError(RuntimeError):
    """The fundamental matrix became numerically singular."""


class WindowError(RuntimeError):
    """No valid contraction window could be constructed."""


class ViolationKind(str, Enum):
    N_NONPOSITIVE = "n_nonpositive"
    N_EXCEEDS_RHO_OVER_EPS = "n_exceeds_rho_over_eps"
    DALPHA_DR_EXCEEDS_INV_EPS = "dalpha_dr_exceeds_inv_eps"


class EstimatorStatus(str, Enum):
    COMPLETED = "completed"
    DOMAIN_VIOLATION = "domain_violation"
    STEP_FAILURE = "step_failure"


# ---------------------------------------------------------------------------
# Bound-function derivatives


def _alpha_at(bounds: BoundBundle, j, rmat, k, r, eps) -> float:
    """Unguarded a_hat + eps*b_hat, for internal finite differencing."""
    return float(bounds.a_hat(j, rmat, k, r) + eps * bounds.b_hat(j, r))


def _dalpha_dr(bounds: BoundBundle, j, rmat, k, r, eps, step) -> float:
    if bounds.a_grad is not None:
        ga = bounds.a_grad(j, rmat, k, r)[3]
        gb = bounds.b_grad(j, r)[1] if bounds.b_grad is not None else _fd_b_r(bounds, j, r, step)
        return float(ga + eps * gb)
    h = step * max(1.0, abs(r))
    return (_alpha_at(bounds, j, rmat, k, r + h, eps)
            - _alpha_at(bounds, j, rmat, k, r - h, eps)) / (2 * h)


def _fd_b_r(bounds, j, r, step):
    h = step * max(1.0, abs(r))
    return (bounds.b_hat(j, r + h) - bounds.b_hat(j, r - h)) / (2 * h)


def _alpha_tau_derivative(bounds: BoundBundle, j, rmat, k, r, eps,
                          dj, drmat, dk, step) -> float:
    """Chain-rule derivative of the offset bound along the slow flow.

    Contracts the partial derivatives with respect to J, R and K with the
    supplied slow-flow derivatives dJ/dtau, dR/dtau, dK/dtau.
    """
    if bounds.a_grad is not None:
        ga_j, ga_r, ga_k, _ = bounds.a_grad(j, rmat, k, r)
        total = (np.sum(ga_j * dj) + np.sum(ga_r * drmat) + np.sum(ga_k * dk))
        if bounds.b_grad is not None:
            gb_j = bounds.b_grad(j, r)[0]
        else:
            gb_j = _fd_b_j(bounds, j, r, step)
        return float(total + eps * np.sum(gb_j * dj))

    total = 0.0
    d = j.shape[0]
    for i in range(d):
        if dj[i] == 0.0:
            continue
        h = step * max(1.0, abs(j[i]))
        jp = j.copy(); jp[i] += h
        jm = j.copy(); jm[i] -= h
        total += dj[i] * (_alpha_at(bounds, jp, rmat, k, r, eps)
                          - _alpha_at(bounds, jm, rmat, k, r, eps)) / (2 * h)
    for a in range(d):
        for b in range(d):
            if drmat[a, b] == 0.0:
                continue
            h = step * max(1.0, abs(rmat[a, b]))
            rp = rmat.copy(); rp[a, b] += h
            rm = rmat.copy(); rm[a, b] -= h
            total += drmat[a, b] * (bounds.a_hat(j, rp, k, r)
                                    - bounds.a_hat(j, rm, k, r)) / (2 * h)
    for i in range(d):
        if dk[i] == 0.0:
            continue
        h = step * max(1.0, abs(k[i]))
        kp = k.copy(); kp[i] += h
        km = k.copy(); km[i] -= h
        total += dk[i] * (bounds.a_hat(j, rmat, kp, r)
                          - bounds.a_hat(j, rmat, km, r)) / (2 * h)
    return float(total)


def _fd_b_j(bounds, j, r, step):
    d = j.shape[0]
    g = np.zeros(d)
    for i in range(d):
        h = step * max(1.0, abs(j[i]))
        jp = j.copy(); jp[i] += h
        jm = j.copy(); jm[i] -= h
        g[i] = (bounds.b_hat(jp, r) - bounds.b_hat(jm, r)) / (2 * h)
    return g


def _invert(rmat: np.ndarray) -> np.ndarray:
    d = rmat.shape[0]
    if d == 1:
        val = rmat[0, 0]
        if val == 0.0:
            raise SingularMatrixError("fundamental matrix is zero")
        inv = np.array([[1.0 / val]])
    elif d == 2:
        det = rmat[0, 0] * rmat[1, 1] - rmat[0, 1] * rmat[1, 0]
        if det == 0.0:
            raise SingularMatrixError("fundamental matrix is singular")
        inv = np.array([[rmat[1, 1], -rmat[0, 1]],
                        [-rmat[1, 0], rmat[0, 0]]]) / det
    else:
        try:
            inv = np.linalg.solve(rmat, np.eye(d))
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(str(exc)) from exc
    if frobenius(rmat) * frobenius(inv) > _COND_LIMIT:
        raise SingularMatrixError("condition estimate of R exceeds 1e12")
    return inv


# ---------------------------------------------------------------------------
# Fixed point


@dataclass(frozen=True)
class ContractionWindow:
    """Interval data certifying the level map is a contraction.

    The map ell -> offset_bound(0, eps*ell) is required to send
    ``[ell_star - sigma, ell_star + sigma]`` into itself with Lipschitz
    constant eps*slope_bound < 1.
    """

    ell_star: float
    sigma: float
    slope_bound: float

    def interval(self):
        return self.ell_star - self.sigma, self.ell_star + self.sigma


def _window_alpha0(spec: SystemSpec, bounds: BoundBundle):
    d = spec.d
    j0 = spec.i0
    rmat0 = np.eye(d)
    k0 = np.zeros(d)
    return j0, rmat0, k0


def verify_window(spec: SystemSpec, bounds: BoundBundle, window: ContractionWindow,
                  n_samples: int = 101, fd_step: float = 1e-6) -> None:
    """Check the contraction preconditions by sampling, raising on failure."""
    eps = spec.epsilon
    j0, rmat0, k0 = _window_alpha0(spec, bounds)
    lo, hi = window.interval()
    rho0 = bounds.rho_hat(j0)
    if not (0.0 < lo and hi < rho0 / eps):
        raise ContractionError(
            f"window [{lo}, {hi}] not inside (0, rho(0)/eps={rho0 / eps})")
    if not window.slope_bound < 1.0 / eps:
        raise ContractionError("slope bound must stay below 1/eps")
    worst = 0.0
    for ell in np.linspace(lo, hi, n_samples):
        slope = abs(_dalpha_dr(bounds, j0, rmat0, k0, eps * ell, eps, fd_step))
        worst = max(worst, slope)
    if worst > window.slope_bound + 1e-12:
        raise ContractionError(
            f"sampled level-map slope {worst} exceeds supplied bound "
            f"{window.slope_bound}")
    a_star = _alpha_at(bounds, j0, rmat0, k0, eps * window.ell_star, eps)
    if not (abs(a_star - window.ell_star) + eps * window.slope_bound * window.sigma
            < window.sigma):
        raise ContractionError("window does not map into itself")


def auto_window(spec: SystemSpec, bounds: BoundBundle,
                n_samples: int = 101, fd_step: float = 1e-6) -> ContractionWindow:
    """Propose a window around the unperturbed level ell* = offset(0, 0).

    Heuristic: sigma = ell*/2 and the slope bound is the sampled maximum of
    |d(offset)/dr| over the window (plus a tiny margin).  Raises
    :class:`WindowError` when no valid window results.
    """
    eps = spec.epsilon
    j0, rmat0, k0 = _window_alpha0(spec, bounds)
    ell_star = _alpha_at(bounds, j0, rmat0, k0, 0.0, eps)
    if not ell_star > 0.0:
        raise WindowError("offset bound at radius 0 must be positive")
    sigma = 0.5 * ell_star
    lo, hi = ell_star - sigma, ell_star + sigma
    rho0 = bounds.rho_hat(j0)
    if not hi < rho0 / eps:
        raise WindowError("proposed window exceeds the tube radius")
    worst = 0.0
    for ell in np.linspace(lo, hi, n_samples):
        worst = max(worst, abs(_dalpha_dr(bounds, j0, rmat0, k0, eps * ell, eps, fd_step)))
    slope = worst * (1.0 + 1e-9) + 1e-15
    window = ContractionWindow(ell_star=ell_star, sigma=sigma, slope_bound=slope)
    try:
        verify_window(spec, bounds, window, n_samples=n_samples, fd_step=fd_step)
    except ContractionError as exc:
        raise WindowError(f"auto window construction failed: {exc}") from exc
    return window


def find_fixed_point(spec: SystemSpec, bounds: BoundBundle,
                     window: ContractionWindow, tol: float = 1e-12,
                     max_iter: int = 200, fd_step: float = 1e-6) -> float:
    """Initial bound level: the fixed point of ell -> offset_bound(0, eps*ell).

    Iterates the map from ell_star after verifying the contraction window by
    sampling.  Convergence requires both the fixed-point residual and the
    a-posteriori contraction bound (eps*M)^(N-1) |l2 - l1| / (1 - eps*M) to
    fall below ``tol``.
    """
    verify_window(spec, bounds, window, fd_step=fd_step)
    eps = spec.epsilon
    j0, rmat0, k0 = _window_alpha0(spec, bounds)
    eps_m = eps * window.slope_bound

    ell = window.ell_star
    first_gap = None
    for it in range(1, max_iter + 1):
        nxt = _alpha_at(bounds, j0, rmat0, k0, eps * ell, eps)
        if first_gap is None:
            first_gap = abs(nxt - ell)
        residual = abs(nxt - ell)
        posterior = (eps_m ** max(it - 1, 0)) * first_gap / (1.0 - eps_m)
        ell = nxt
        if residual <= tol and posterior <= tol:
            return float(ell)
    raise NoConvergenceError(
        f"fixed point not located within {max_iter} iterations (tol={tol})")


# ---------------------------------------------------------------------------
# Slow-time coupled system


def pack_state(j, rmat, k, m, n) -> np.ndarray:
    return np.concatenate([np.ravel(j), np.ravel(rmat), np.ravel(k), [m, n]])


def unpack_state(y: np.ndarray, d: int):
    j = y[:d]
    rmat = y[d:d + d * d].reshape(d, d)
    k = y[d + d * d:2 * d + d * d]
    m = y[-2]
    n = y[-1]
    return j, rmat, k, m, n


def assemble_slow_rhs(spec: SystemSpec, aux: AuxiliaryBundle,
                      bounds: BoundBundle, fd_step: float = 1e-6) -> Callable:
    """Right side of the packed slow system [J, R, K, m, n].

    Implements dJ = fbar(J), dR = dfbar(J) R, dK = dfbar(J) K + pbar(J),
    dm = |R^-1| * growth, and the bound equation

        dn = (d(offset)/dtau + eps |R||R^-1| growth + eps (R . dR)/|R| m)
             / (1 - eps * d(offset)/dr)

    with growth evaluated at (J, eps*n, n) and the offset partials taken at
    (J, R, K, eps*n), by the bundle's analytic gradients when present and by
    central differences with step ``fd_step`` times the argument scale
    otherwise.
    """
    eps = spec.epsilon
    d = spec.d

    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        j, rmat, k, m, n = unpack_state(y, d)
        amat = aux.dfbar(j)
        dj = aux.fbar(j)
        drmat = amat @ rmat
        dk = amat @ k + aux.pbar(j)

        rinv = _invert(rmat)
        norm_r = frobenius(rmat)
        norm_rinv = frobenius(rinv)
        radius = eps * n
        gam = (bounds.c_hat(j, radius) + bounds.d_hat(j, radius) * n
               + 0.5 * bounds.e_hat(j, radius) * n * n)
        dm = norm_rinv * gam

        dal_dr = _dalpha_dr(bounds, j, rmat, k, radius, eps, fd_step)
        dal_dtau = _alpha_tau_derivative(bounds, j, rmat, k, radius, eps,
                                         dj, drmat, dk, fd_step)
        denom = 1.0 - eps * dal_dr
        dn = (dal_dtau + eps * norm_r * norm_rinv * gam
              + eps * float(np.sum(rmat * drmat)) / norm_r * m) / denom

        out = np.empty_like(y)
        out[:d] = dj
        out[d:d + d * d] = drmat.ravel()
        out[d + d * d:2 * d + d * d] = dk
        out[-2] = dm
        out[-1] = dn
        return out

    return rhs


@dataclass
class EstimatorTrajectory:
    """Slow-time grid of the estimator run.

    The grid is the integrator's accepted steps; ``sample_*`` use dense
    output in between.  ``n`` is the certified bound: on a completed run,
    |I(t) - J(eps*t)| <= eps * n(eps*t) holds for t in [0, U/eps).
    """

    d: int
    eps: float
    ell0: float
    tau: np.ndarray            # (ngrid,)
    j: np.ndarray              # (ngrid, d)
    r: np.ndarray              # (ngrid, d, d)
    k: np.ndarray              # (ngrid, d)
    m: np.ndarray              # (ngrid,)
    n: np.ndarray              # (ngrid,)
    status: EstimatorStatus
    violation_kind: Optional[ViolationKind]
    window: ContractionWindow
    window_mode: str           # "auto" or "explicit"
    wall_time_s: float
    traj: ode.Trajectory

    @property
    def tau_final(self) -> float:
        return float(self.tau[-1])

    def sample_packed(self, tau: float) -> np.ndarray:
        return self.traj.sample(tau)

    def sample_j(self, tau: float) -> np.ndarray:
        return self.traj.sample(tau)[:self.d]

    def sample_r(self, tau: float) -> np.ndarray:
        return self.traj.sample(tau)[self.d:self.d + self.d * self.d].reshape(self.d, self.d)

    def sample_k(self, tau: float) -> np.ndarray:
        d = self.d
        return self.traj.sample(tau)[d + d * d:2 * d + d * d]

    def sample_n(self, tau: float) -> float:
        return float(self.traj.sample(tau)[-1])

    def report_grid(self, n_points: int = REPORT_GRID_POINTS) -> np.ndarray:
        """Uniform dense-output resampling: rows [tau, J, R, K, m, n]."""
        taus = np.linspace(self.tau[0], self.tau[-1], n_points)
        rows = np.empty((n_points, self.traj.states.shape[1] + 1))
        for i, t in enumerate(taus):
            rows[i, 0] = t
            rows[i, 1:] = self.traj.sample(t)
        return rows


def _make_stop_predicate(spec, bounds, fd_step):
    eps = spec.epsilon
    d = spec.d

    def margins(y):
        j, rmat, k, m, n = unpack_state(y, d)
        if n <= 0.0:
            return ViolationKind.N_NONPOSITIVE
        rho = bounds.rho_hat(j)
        if not np.isfinite(rho):
            rho = np.inf
        if not n < rho / eps:
            return ViolationKind.N_EXCEEDS_RHO_OVER_EPS
        dal = _dalpha_dr(bounds, j, rmat, k, eps * n, eps, fd_step)
        if not dal < 1.0 / eps:
            return ViolationKind.DALPHA_DR_EXCEEDS_INV_EPS
        return None

    def stop(tau, y):
        try:
            return margins(y) is not None
        except (ArithmeticError, ValueError):
            return True

    return stop, margins


def run_estimator(spec: SystemSpec, aux: AuxiliaryBundle, bounds: BoundBundle,
                  u: float, window: Optional[ContractionWindow] = None,
                  rtol: float = 1e-9, atol: float = 1e-12,
                  fixed_point_tol: float = 1e-12, fd_step: float = 1e-6,
                  max_steps: int = 10_000_000) -> EstimatorTrajectory:
    """Run the full slow-time estimator on [0, u].

    Computes the fixed point ell0, integrates the coupled system from
    (I0, identity, 0, 0, ell0), and monitors the validity conditions; an
    early stop is reported as ``domain_violation`` with the failed condition.
    """
    if not u > 0.0:
        raise ValueError("U must be positive")
    t_start = time.perf_counter()
    window_mode = "explicit"
    if window is None:
        window = auto_window(spec, bounds, fd_step=fd_step)
        window_mode = "auto"
    ell0 = find_fixed_point(spec, bounds, window, tol=fixed_point_tol,
                            fd_step=fd_step)

    d = spec.d
    y0 = pack_state(spec.i0, np.eye(d), np.zeros(d), 0.0, ell0)
    rhs = assemble_slow_rhs(spec, aux, bounds, fd_step=fd_step)
    stop, margins = _make_stop_predicate(spec, bounds, fd_step)
    problem = ode.IvpProblem(dimension=y0.size, rhs=rhs, t0=0.0, y0=y0, t_end=u)
    traj = ode.integrate(problem, rtol=rtol, atol=atol, stop=stop,
                         max_steps=max_steps)

    if traj.status is ode.Status.COMPLETED:
        status, kind = EstimatorStatus.COMPLETED, None
    elif traj.status is ode.Status.STOPPED:
        status = EstimatorStatus.DOMAIN_VIOLATION
        try:
            kind = margins(traj.states[-1])
        except (ArithmeticError, ValueError):
            kind = ViolationKind.N_EXCEEDS_RHO_OVER_EPS
        if kind is None:
            # localization landed a hair inside the region; flag the nearest
            kind = ViolationKind.N_EXCEEDS_RHO_OVER_EPS
    else:
        status, kind = EstimatorStatus.STEP_FAILURE, None

    states = traj.states
    return EstimatorTrajectory(
        d=d,
        eps=spec.epsilon,
        ell0=ell0,
        tau=traj.times.copy(),
        j=states[:, :d].copy(),
        r=states[:, d:d + d * d].reshape(-1, d, d).copy(),
        k=states[:, d + d * d:2 * d + d * d].copy(),
        m=states[:, -2].copy(),
        n=states[:, -1].copy(),
        status=status,
        violation_kind=kind,
        window=window,
        window_mode=window_mode,
        wall_time_s=time.perf_counter() - t_start,
        traj=traj,
    )


def run_averaged(spec: SystemSpec, aux: AuxiliaryBundle, u: float,
                 rtol: float = 1e-10, atol: float = 1e-13,
                 max_steps: int = 10_000_000) -> ode.Trajectory:
    """Integrate the averaged actions dJ/dtau = fbar(J) alone on [0, u]."""
    problem = ode.IvpProblem(
        dimension=spec.d,
        rhs=lambda tau, j: aux.fbar(j),
        t0=0.0,
        y0=spec.i0,
        t_end=u,
    )
    stop = lambda tau, j: not spec.in_domain(j)
    return ode.integrate(problem, rtol=rtol, atol=atol, stop=stop,
                         max_steps=max_steps)


class CrosscheckResult(NamedTuple):
    """Maximum deviations of the numeric slow flow from closed forms."""

    max_j: float
    max_r: float
    max_k: float
    grid_points: int

    @property
    def max_residual(self) -> float:
        return max(self.max_j, self.max_r, self.max_k)


def analytic_crosscheck(example, traj: EstimatorTrajectory) -> CrosscheckResult:
    """Compare J, R, K along ``traj`` with an example's closed forms.

    ``example`` must carry closed-form callables (see
    :class:`averbound.examples.ExampleDefinition`); raises ``ValueError``
    otherwise.  Residuals are measured on the accepted integration grid.
    """
    if example.closed_j is None:
        raise ValueError(f"example {example.id!r} has no closed-form slow flow")
    i0 = traj.j[0]
    max_j = max_r = max_k = 0.0
    for idx, tau in enumerate(traj.tau):
        max_j = max(max_j, float(np.max(np.abs(traj.j[idx] - example.closed_j(i0, tau)))))
        max_r = max(max_r, float(np.max(np.abs(traj.r[idx] - example.closed_r(i0, tau)))))
        max_k = max(max_k, float(np.max(np.abs(traj.k[idx] - example.closed_k(i0, tau)))))
    return CrosscheckResult(max_j=max_j, max_r=max_r, max_k=max_k,
                            grid_points=len(traj.tau))
