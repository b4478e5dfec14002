"""Core types for perturbed one-frequency systems and their error-bound data.

A perturbed system evolves actions I in an open set of R^d and one angle on
the torus:

    dI/dt     = eps * f(I, theta)
    dtheta/dt = omega(I) + eps * g(I, theta)

The averaged flow dJ/dtau = fbar(J) (tau = eps*t) approximates the actions,
and the error L(t) = (I(t) - J(eps*t)) / eps is controlled by a certified
estimator built from two bundles of user-supplied callables:

* :class:`AuxiliaryBundle` -- the exact conjugation data (s, v, p, q, w, u,
  and the matrix / Taylor-remainder functions) entering the integral
  identity for L;
* :class:`BoundBundle` -- pointwise majorants (rho, a, b, c, d, e) of the
  auxiliary terms on a tube of radius rho around the averaged trajectory.

All callables take/return plain numpy arrays: actions are shape ``(d,)``,
matrices ``(d, d)``, third-order tensors ``(d, d, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DomainError",
    "SystemSpec",
    "AuxiliaryBundle",
    "BoundBundle",
    "TaylorPair",
    "frobenius",
    "offset_bound",
    "growth_bound",
]

TWO_PI = 2.0 * np.pi

Vec = np.ndarray
VecFun = Callable[[np.ndarray, float], np.ndarray]


class DomainError(ValueError):
    """Raised when a bound function is evaluated outside its tube 0 <= r < rho."""


def frobenius(x) -> float:
    """Euclidean (Frobenius) norm of a vector, matrix or third-order tensor.

    The square root of the sum of squared entries, for any array shape.
    """
    arr = np.asarray(x, dtype=float)
    return float(np.sqrt(np.sum(arr * arr)))


@dataclass(frozen=True)
class SystemSpec:
    """A perturbed one-frequency system together with its initial data.

    Attributes
    ----------
    d : action-space dimension.
    epsilon : perturbation size, > 0.
    omega : unperturbed frequency, ``omega(I) -> float``, nonzero on the domain.
    f : action perturbation, ``f(I, theta) -> (d,)``, 2*pi-periodic in theta.
    g : angle perturbation, ``g(I, theta) -> float``, 2*pi-periodic in theta.
    in_domain : membership predicate for the open action domain.
    i0, theta0 : initial actions and angle; theta0 is reduced mod 2*pi.
    """

    d: int
    epsilon: float
    omega: Callable[[np.ndarray], float]
    f: VecFun
    g: Callable[[np.ndarray, float], float]
    in_domain: Callable[[np.ndarray], bool]
    i0: np.ndarray
    theta0: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension d must be a positive integer")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        i0 = np.atleast_1d(np.asarray(self.i0, dtype=float))
        if i0.shape != (self.d,):
            raise ValueError(f"i0 must have shape ({self.d},), got {i0.shape}")
        object.__setattr__(self, "i0", i0)
        object.__setattr__(self, "theta0", float(self.theta0) % TWO_PI)
        if not self.in_domain(i0):
            raise ValueError("initial actions i0 lie outside the action domain")

    def spot_check(self, points=None, n_theta: int = 7, tol: float = 1e-12) -> None:
        """Spot-check omega != 0 and 2*pi-periodicity of f, g at sample points.

        ``points`` defaults to the initial actions only.
        """
        pts = [self.i0] if points is None else list(points)
        for i in pts:
            i = np.asarray(i, dtype=float)
            if not self.in_domain(i):
                raise ValueError("spot-check point outside the action domain")
            if self.omega(i) == 0.0:
                raise ValueError(f"omega vanishes at {i}")
            for th in np.linspace(0.0, TWO_PI, n_theta, endpoint=False):
                df = np.max(np.abs(np.asarray(self.f(i, th)) - self.f(i, th + TWO_PI)))
                dg = abs(self.g(i, th) - self.g(i, th + TWO_PI))
                if df > tol or dg > tol:
                    raise ValueError("f or g is not 2*pi-periodic in the angle")


@dataclass(frozen=True)
class AuxiliaryBundle:
    """Closed-form conjugation data for a specific system.

    ``fbar`` is the angle average of f and ``dfbar`` its Jacobian; ``s``
    solves f = fbar + omega * ds/dtheta with zero angle average; ``v`` and
    ``w`` are angle antiderivatives of s and p - pbar vanishing at theta0;
    ``p``, ``q``, ``u`` are the transported derivatives of s, v, w along the
    flow; ``m_script`` is the commutator-type matrix built from fbar, and
    ``g_script`` / ``h_script`` are Taylor remainder functions for pbar and
    fbar:

        pbar(I + dI) = pbar(I) + g_script(I, dI) @ dI
        fbar(I + dI) = fbar(I) + dfbar(I) @ dI + 1/2 h_script(I, dI) dI dI

    with h_script symmetric in its two lower indices.
    """

    fbar: Callable[[np.ndarray], np.ndarray]
    dfbar: Callable[[np.ndarray], np.ndarray]
    s: VecFun
    v: VecFun
    p: VecFun
    pbar: Callable[[np.ndarray], np.ndarray]
    q: VecFun
    w: VecFun
    u: VecFun
    m_script: Callable[[np.ndarray], np.ndarray]
    g_script: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h_script: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BoundBundle:
    """Majorant functions defining the certified error estimator.

    ``rho_hat(J)`` is the tube radius around the averaged trajectory (may be
    +inf).  For 0 <= r < rho_hat(J):

    * ``a_hat(J, R, K, r)`` dominates |s(J+dJ,th) - R s(I0,th0) - K|,
    * ``b_hat(J, r)``       dominates |w - dfbar(J) v| at (J+dJ, th),
    * ``c_hat(J, r)``       dominates |u - dfbar(J)(w+q) - m_script(J) v|,
    * ``d_hat(J, r)``       dominates |g_script(J, dJ)|,
    * ``e_hat(J, r)``       dominates |h_script(J, dJ)|,

    over all |dJ| <= r and all angles; c, d, e must be non-decreasing in r.

    ``a_grad`` / ``b_grad`` optionally supply analytic partial derivatives
    (with respect to J, R, K, r and J, r respectively); when absent the
    estimator falls back to central finite differences.
    """

    rho_hat: Callable[[np.ndarray], float]
    a_hat: Callable[[np.ndarray, np.ndarray, np.ndarray, float], float]
    b_hat: Callable[[np.ndarray, float], float]
    c_hat: Callable[[np.ndarray, float], float]
    d_hat: Callable[[np.ndarray, float], float]
    e_hat: Callable[[np.ndarray, float], float]
    a_grad: Optional[Callable] = None
    b_grad: Optional[Callable] = None


@dataclass(frozen=True)
class TaylorPair:
    """A base point and increment whose whole segment stays in the domain."""

    base: np.ndarray
    increment: np.ndarray

    def check_segment(self, spec: SystemSpec, n_points: int = 17) -> bool:
        """True when [base, base+increment] lies in the domain, sampled at
        ``n_points`` equispaced points."""
        base = np.asarray(self.base, dtype=float)
        inc = np.asarray(self.increment, dtype=float)
        for x in np.linspace(0.0, 1.0, n_points):
            if not spec.in_domain(base + x * inc):
                return False
        return True


def _check_radius(bounds: BoundBundle, j: np.ndarray, r: float) -> None:
    rho = bounds.rho_hat(j)
    if not r < rho:
        raise DomainError(f"radius r={r} outside the tube [0, {rho})")


def offset_bound(bounds: BoundBundle, j: np.ndarray, r_mat: np.ndarray,
                 k: np.ndarray, r: float, eps: float) -> float:
    """Offset term of the error inequality: a_hat + eps * b_hat.

    Requires 0 <= r < rho_hat(j); raises :class:`DomainError` at or beyond
    the tube radius.
    """
    _check_radius(bounds, j, r)
    val = bounds.a_hat(j, r_mat, k, r)
    if eps != 0.0:
        val += eps * bounds.b_hat(j, r)
    return float(val)


def growth_bound(bounds: BoundBundle, j: np.ndarray, r: float, ell: float) -> float:
    """Growth kernel of the error inequality: c_hat + d_hat*ell + e_hat*ell^2/2."""
    _check_radius(bounds, j, r)
    return float(bounds.c_hat(j, r) + bounds.d_hat(j, r) * ell
                 + 0.5 * bounds.e_hat(j, r) * ell * ell)
