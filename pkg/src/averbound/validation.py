"""Cross-checks for bundles, bounds and computed trajectories.

Four independent verification layers:

* :func:`verify_identities` -- the auxiliary bundle satisfies its defining
  equations (finite differences in the actions and the angle, quadrature
  over the torus, algebraic Taylor identities);
* :func:`verify_bound_domination` -- the majorants a..e dominate the five
  inequality left sides on stratified samples along a computed trajectory;
* :func:`verify_integral_identity` -- the exact integral representation of
  the scaled error holds along a direct run, with trapezoid quadrature;
* :func:`verify_headline_bound` -- |L(t)| <= n(eps*t) on the full fast grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .direct import DirectTrajectory, envelope
from .estimator import EstimatorTrajectory
from .model import AuxiliaryBundle, BoundBundle, SystemSpec, frobenius

__all__ = [
    "ValidationReport",
    "verify_identities",
    "verify_bound_domination",
    "verify_integral_identity",
    "verify_headline_bound",
]

TWO_PI = 2.0 * np.pi

IDENTITY_TOL = 1e-8
_FD_REL = 2.5e-4          # 5-point stencil step, relative to the argument
_QUAD_THETA = 256         # torus quadrature nodes (exact for short trig polys)
# Domination slack: only count exceedances beyond roundoff, the a-majorants
# of several examples are attained suprema.
_DOM_REL_SLACK = 1e-12
_DOM_ABS_SLACK = 1e-14


@dataclass
class ValidationReport:
    """Outcome of one check: residual/violation summary plus worst point."""

    name: str
    samples: int
    tolerance: float
    max_residual: Optional[float] = None
    violations: Optional[int] = None
    passed: bool = False
    details: Dict = field(default_factory=dict)

    def finalize(self) -> "ValidationReport":
        if self.violations is not None:
            self.passed = self.violations == 0
        elif self.max_residual is not None:
            self.passed = self.max_residual <= self.tolerance
        return self

    def to_dict(self) -> Dict:
        def clean(x):
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, np.ndarray):
                return x.tolist()
            if isinstance(x, (np.floating, np.integer)):
                return x.item()
            return x
        return clean({
            "name": self.name,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "violations": self.violations,
            "passed": self.passed,
            "details": self.details,
        })


# ---------------------------------------------------------------------------
# Finite differences (5-point central: roundoff stays far below the 1e-8 gate)


def _d_theta(fn, i, th, h=_FD_REL):
    return (-fn(i, th + 2 * h) + 8 * fn(i, th + h)
            - 8 * fn(i, th - h) + fn(i, th - 2 * h)) / (12 * h)


def _d_action(fn, i, th, j):
    h = _FD_REL * abs(i[j])
    def at(dx):
        ip = i.copy()
        ip[j] += dx
        return fn(ip, th)
    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)


def _jac_action(fn, i, th, d):
    return np.stack([_d_action(fn, i, th, j) for j in range(d)], axis=1)


def _d_plain(fn, i, j):
    h = _FD_REL * abs(i[j])
    def at(dx):
        ip = i.copy()
        ip[j] += dx
        return fn(ip)
    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)


def _action_grid(box, per_axis: int) -> List[np.ndarray]:
    lo, hi = box
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return [np.array(pt, dtype=float) for pt in zip(*(m.ravel() for m in mesh))]


def verify_identities(spec: SystemSpec, aux: AuxiliaryBundle,
                      sample_box, grid_size: int = 0,
                      tol: float = IDENTITY_TOL) -> ValidationReport:
    """Residuals of every defining identity of the auxiliary bundle.

    Samples a grid of at least 100 (I, theta) points inside the given action
    box (assumed inside the domain); per-identity maxima land in
    ``details["per_identity"]``.
    """
    d = spec.d
    per_axis = grid_size or (10 if d == 1 else 4)
    points = _action_grid(sample_box, per_axis)
    thetas = np.linspace(0.0, TWO_PI, 13)[:-1]
    th_quad = np.linspace(0.0, TWO_PI, _QUAD_THETA + 1)[:-1]

    worst: Dict[str, float] = {}
    worst_point: Dict[str, Tuple] = {}

    def record(key, value, point):
        value = float(value)
        if value > worst.get(key, -1.0):
            worst[key] = value
            worst_point[key] = point

    for i in points:
        if not spec.in_domain(i):
            raise ValueError(f"identity sample point {i} outside the domain")
        om = spec.omega(i)
        # torus averages (trapezoid is exact for trigonometric polynomials)
        record("fbar_is_mean_f",
               np.max(np.abs(np.mean([spec.f(i, t) for t in th_quad], axis=0)
                             - aux.fbar(i))), (i, None))
        record("pbar_is_mean_p",
               np.max(np.abs(np.mean([aux.p(i, t) for t in th_quad], axis=0)
                             - aux.pbar(i))), (i, None))
        record("s_has_zero_mean",
               np.max(np.abs(np.mean([aux.s(i, t) for t in th_quad], axis=0))),
               (i, None))
        record("v_zero_at_theta0", np.max(np.abs(aux.v(i, spec.theta0))), (i, spec.theta0))
        record("w_zero_at_theta0", np.max(np.abs(aux.w(i, spec.theta0))), (i, spec.theta0))
        record("dfbar_is_jacobian",
               np.max(np.abs(np.stack([_d_plain(aux.fbar, i, j) for j in range(d)],
                                       axis=1) - aux.dfbar(i))), (i, None))
        # m_script[i,j] = sum_k d2 fbar^i/(dI^k dI^j) fbar^k - (dfbar^2)[i,j]
        dfb = aux.dfbar(i)
        hess = np.stack([_d_plain(aux.dfbar, i, j) for j in range(d)], axis=2)
        m_def = np.einsum("ikj,k->ij", hess, aux.fbar(i)) - dfb @ dfb
        record("m_script_definition", np.max(np.abs(m_def - aux.m_script(i))), (i, None))

        for th in thetas:
            fv = spec.f(i, th)
            gv = spec.g(i, th)
            record("f_decomposition",
                   np.max(np.abs(fv - aux.fbar(i) - om * _d_theta(aux.s, i, th))),
                   (i, th))
            record("s_from_v",
                   np.max(np.abs(aux.s(i, th) - om * _d_theta(aux.v, i, th))),
                   (i, th))
            record("p_decomposition",
                   np.max(np.abs(aux.p(i, th) - aux.pbar(i)
                                 - om * _d_theta(aux.w, i, th))), (i, th))
            record("p_definition",
                   np.max(np.abs(aux.p(i, th) - (_jac_action(aux.s, i, th, d) @ fv
                                                 + _d_theta(aux.s, i, th) * gv))),
                   (i, th))
            record("q_definition",
                   np.max(np.abs(aux.q(i, th) - (_jac_action(aux.v, i, th, d) @ fv
                                                 + _d_theta(aux.v, i, th) * gv))),
                   (i, th))
            record("u_definition",
                   np.max(np.abs(aux.u(i, th) - (_jac_action(aux.w, i, th, d) @ fv
                                                 + _d_theta(aux.w, i, th) * gv))),
                   (i, th))

    # Taylor identities on segment increments inside the box.
    lo, hi = sample_box
    targets = _action_grid(sample_box, 3)
    for i in points[:: max(1, len(points) // 8)]:
        for tgt in targets:
            di = tgt - i
            if np.all(di == 0.0):
                continue
            record("pbar_taylor",
                   np.max(np.abs(aux.pbar(i + di) - aux.pbar(i)
                                 - aux.g_script(i, di) @ di)), (i, tuple(di)))
            hterm = 0.5 * np.einsum("ijk,j,k->i", aux.h_script(i, di), di, di)
            record("fbar_taylor",
                   np.max(np.abs(aux.fbar(i + di) - aux.fbar(i)
                                 - aux.dfbar(i) @ di - hterm)), (i, tuple(di)))
            hten = aux.h_script(i, di)
            record("h_script_symmetry",
                   np.max(np.abs(hten - hten.transpose(0, 2, 1))), (i, tuple(di)))

    overall = max(worst.values())
    key = max(worst, key=worst.get)
    return ValidationReport(
        name="auxiliary-identities",
        samples=len(points) * len(thetas),
        tolerance=tol,
        max_residual=overall,
        details={
            "per_identity": worst,
            "worst_identity": key,
            "worst_point": repr(worst_point[key]),
        },
    ).finalize()


# ---------------------------------------------------------------------------


def _directions(d: int, count: int = 16) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = np.linspace(0.0, TWO_PI, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(0)
    vs = rng.normal(size=(count, d))
    return vs / np.linalg.norm(vs, axis=1, keepdims=True)


def verify_bound_domination(spec: SystemSpec, aux: AuxiliaryBundle,
                            bounds: BoundBundle, est: EstimatorTrajectory,
                            n_tau: int = 25, n_r: int = 10, n_theta: int = 20,
                            max_radius_frac: float = 0.98) -> ValidationReport:
    """Count violations of the five majorant inequalities along ``est``.

    Stratified deterministic sampling in (tau, r/rho, theta) with increment
    directions enumerated (signs for d = 1, a fan of angles for d = 2).
    Also spot-checks that c, d, e are non-decreasing in the radius.
    """
    d = spec.d
    s0 = aux.s(spec.i0, spec.theta0)
    taus = (np.arange(n_tau) + 0.5) / n_tau * est.tau_final
    fracs = (np.arange(n_r) + 0.5) / n_r * max_radius_frac
    thetas = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    dirs = _directions(d)

    violations = 0
    samples = 0
    worst = {"margin": -np.inf}
    monotone_bad = 0

    for tau in taus:
        j = est.sample_j(tau)
        rmat = est.sample_r(tau)
        kvec = est.sample_k(tau)
        dfb = aux.dfbar(j)
        msc = aux.m_script(j)
        rho = bounds.rho_hat(j)
        base = rmat @ s0 + kvec
        prev = None
        for frac in fracs:
            r = frac * rho
            a_val = bounds.a_hat(j, rmat, kvec, r)
            b_val = bounds.b_hat(j, r)
            c_val = bounds.c_hat(j, r)
            d_val = bounds.d_hat(j, r)
            e_val = bounds.e_hat(j, r)
            if prev is not None:
                if (c_val < prev[0] - 1e-12 or d_val < prev[1] - 1e-12
                        or e_val < prev[2] - 1e-12):
                    monotone_bad += 1
            prev = (c_val, d_val, e_val)

            for direction in dirs:
                dj = r * direction
                i_pt = j + dj
                lhs_d = frobenius(aux.g_script(j, dj))
                lhs_e = frobenius(aux.h_script(j, dj))
                for name, lhs, bound in (("d", lhs_d, d_val), ("e", lhs_e, e_val)):
                    samples += 1
                    margin = lhs - bound
                    if margin > _DOM_REL_SLACK * max(1.0, bound) + _DOM_ABS_SLACK:
                        violations += 1
                    if margin > worst["margin"]:
                        worst = {"margin": margin, "which": name, "tau": tau,
                                 "r": r, "direction": direction.tolist()}
                for th in thetas:
                    sv = aux.s(i_pt, th)
                    wv = aux.w(i_pt, th)
                    vv = aux.v(i_pt, th)
                    uv = aux.u(i_pt, th)
                    qv = aux.q(i_pt, th)
                    lhs_a = frobenius(sv - base)
                    lhs_b = frobenius(wv - dfb @ vv)
                    lhs_c = frobenius(uv - dfb @ (wv + qv) - msc @ vv)
                    for name, lhs, bound in (("a", lhs_a, a_val),
                                             ("b", lhs_b, b_val),
                                             ("c", lhs_c, c_val)):
                        samples += 1
                        margin = lhs - bound
                        if margin > _DOM_REL_SLACK * max(1.0, bound) + _DOM_ABS_SLACK:
                            violations += 1
                        if margin > worst["margin"]:
                            worst = {"margin": margin, "which": name, "tau": tau,
                                     "r": r, "theta": th,
                                     "direction": direction.tolist()}

    violations += monotone_bad
    return ValidationReport(
        name="bound-domination",
        samples=samples,
        tolerance=0.0,
        violations=violations,
        details={"worst": worst, "monotonicity_failures": monotone_bad},
    ).finalize()


# ---------------------------------------------------------------------------


def verify_integral_identity(spec: SystemSpec, aux: AuxiliaryBundle,
                             est: EstimatorTrajectory, dtraj: DirectTrajectory,
                             n_quad: int = 2048,
                             tol: float = 1e-4) -> ValidationReport:
    """Residual of the exact integral representation of the scaled error.

    Reconstructs I(t) = J(eps*t) + eps*L(t) on a uniform fast grid of
    ``n_quad`` intervals and compares L against the conjugation identity,
    with the memory integral computed by cumulative trapezoid quadrature.
    The residual is quadrature-dominated: halving the step (doubling
    ``n_quad``) should shrink it by about four.
    """
    eps = spec.epsilon
    d = spec.d
    t_hi = min(dtraj.t[-1], est.tau_final / eps)
    ts = np.linspace(0.0, t_hi, n_quad + 1)

    ell = np.empty((ts.size, d))
    integrand = np.empty((ts.size, d))
    resid = np.empty(ts.size)

    samples_fast = dtraj.traj.sample_many(ts)
    for idx, t in enumerate(ts):
        tau = eps * t
        packed = est.traj.sample(tau)
        j = packed[:d]
        rmat = packed[d:d + d * d].reshape(d, d)
        lvec = samples_fast[idx, :d]
        theta = samples_fast[idx, d]
        actions = j + eps * lvec
        ell[idx] = lvec
        rinv = np.linalg.inv(rmat)
        gsc = aux.g_script(j, eps * lvec)
        hsc = aux.h_script(j, eps * lvec)
        term = (aux.u(actions, theta)
                - aux.dfbar(j) @ (aux.w(actions, theta) + aux.q(actions, theta))
                - aux.m_script(j) @ aux.v(actions, theta)
                - gsc @ lvec
                + 0.5 * np.einsum("ijk,j,k->i", hsc, lvec, lvec))
        integrand[idx] = rinv @ term

    dt = np.diff(ts)
    cumulative = np.zeros((ts.size, d))
    cumulative[1:] = np.cumsum(
        0.5 * (integrand[1:] + integrand[:-1]) * dt[:, None], axis=0)

    s0 = aux.s(spec.i0, spec.theta0)
    for idx, t in enumerate(ts):
        tau = eps * t
        packed = est.traj.sample(tau)
        j = packed[:d]
        rmat = packed[d:d + d * d].reshape(d, d)
        kvec = packed[d + d * d:2 * d + d * d]
        lvec = ell[idx]
        theta = samples_fast[idx, d]
        actions = j + eps * lvec
        rhs = (aux.s(actions, theta) - rmat @ s0 - kvec
               - eps * (aux.w(actions, theta) - aux.dfbar(j) @ aux.v(actions, theta))
               + eps ** 2 * (rmat @ cumulative[idx]))
        resid[idx] = np.max(np.abs(lvec - rhs))

    worst_idx = int(np.argmax(resid))
    return ValidationReport(
        name="integral-identity",
        samples=ts.size,
        tolerance=tol,
        max_residual=float(resid[worst_idx]),
        details={"worst_t": float(ts[worst_idx]), "n_quad": n_quad,
                 "residual_at_t0": float(resid[0])},
    ).finalize()


# ---------------------------------------------------------------------------


def verify_headline_bound(est: EstimatorTrajectory, dtraj: DirectTrajectory,
                          window: Optional[float] = None,
                          rel_slack: float = 1e-12) -> ValidationReport:
    """Check |L(t)| <= n(eps*t) on the direct run's grid.

    Violations are counted only beyond ``rel_slack * n`` to absorb roundoff.
    ``details`` reports the envelope tightness max(peak |L| / n) per window
    (window defaults to a fiftieth of the covered slow span).
    """
    eps = dtraj.eps
    t_hi = min(dtraj.t[-1], est.tau_final / eps)
    mask = dtraj.t <= t_hi * (1 + 1e-12)
    ts = dtraj.t[mask]
    mags = dtraj.abs_l[mask]

    n_vals = np.array([est.sample_n(eps * t) for t in ts])
    gap = mags - n_vals
    bad = gap > rel_slack * np.abs(n_vals)
    violations = int(np.count_nonzero(bad))
    worst_idx = int(np.argmax(gap))

    span = eps * float(ts[-1]) if ts.size else 0.0
    win = window if window is not None else max(span / 50.0, 1e-12)
    tightness = 0.0
    tight_at = None
    if span > 0.0:
        for tau_peak, peak in envelope(dtraj, win):
            if eps * ts[0] <= tau_peak <= span:
                ratio = peak / est.sample_n(tau_peak)
                if ratio > tightness:
                    tightness, tight_at = ratio, tau_peak

    return ValidationReport(
        name="headline-bound",
        samples=int(ts.size),
        tolerance=0.0,
        violations=violations,
        details={
            "worst_gap": float(gap[worst_idx]),
            "worst_t": float(ts[worst_idx]),
            "tightness": float(tightness),
            "tightness_at_tau": tight_at,
            "envelope_window": win,
        },
    ).finalize()
