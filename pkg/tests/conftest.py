"""Shared fixtures: example definitions and cached short runs."""
import numpy as np
import pytest

import averbound as ab


@pytest.fixture(scope="session")
def vdp():
    return ab.make_vdp()


@pytest.fixture(scope="session")
def resonant():
    return ab.make_resonant()


@pytest.fixture(scope="session")
def af_plus():
    return ab.make_action_freq(1)


@pytest.fixture(scope="session")
def af_minus():
    return ab.make_action_freq(-1)


@pytest.fixture(scope="session")
def euler():
    return ab.make_euler_top(1.0, 2.0, -1.0)


@pytest.fixture(scope="session")
def resonant_run(resonant):
    """Resonant system, I0=2, eps=1e-2, U=1: estimator plus direct run."""
    spec = resonant.make_system([2.0], 1e-2)
    est = ab.run_estimator(spec, resonant.aux, resonant.bounds, 1.0)
    avg = ab.run_averaged(spec, resonant.aux, 1.0)
    dtraj = ab.run_direct(spec, resonant.aux, avg, 1.0)
    return spec, est, avg, dtraj


def toy_linear_decay(eps=1e-2, i0=2.0):
    """System with f independent of the angle: the scaled error vanishes.

    f = fbar = -I, omega = 1, g = 0; all conjugation functions are zero and
    constant bounds keep the estimator well-posed.
    """
    aux = ab.AuxiliaryBundle(
        fbar=lambda i: -i,
        dfbar=lambda i: -np.eye(1),
        s=lambda i, th: np.zeros(1),
        v=lambda i, th: np.zeros(1),
        p=lambda i, th: np.zeros(1),
        pbar=lambda i: np.zeros(1),
        q=lambda i, th: np.zeros(1),
        w=lambda i, th: np.zeros(1),
        u=lambda i, th: np.zeros(1),
        m_script=lambda i: -np.eye(1),
        g_script=lambda i, di: np.zeros((1, 1)),
        h_script=lambda i, di: np.zeros((1, 1, 1)),
    )
    bounds = ab.BoundBundle(
        rho_hat=lambda j: float(j[0]),
        a_hat=lambda j, r_mat, k, r: 0.01,
        b_hat=lambda j, r: 0.01,
        c_hat=lambda j, r: 0.01,
        d_hat=lambda j, r: 0.0,
        e_hat=lambda j, r: 0.0,
    )
    spec = ab.SystemSpec(
        d=1, epsilon=eps,
        omega=lambda i: 1.0,
        f=lambda i, th: -i,
        g=lambda i, th: 0.0,
        in_domain=lambda i: bool(i[0] > 0.0),
        i0=np.array([i0]),
    )
    return spec, aux, bounds
