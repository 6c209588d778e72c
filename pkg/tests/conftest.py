"""Shared fixtures: reference parameter sets, random-tensor factories, oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from prestress_tube import (
    MaterialLayer,
    SectorGeometry,
    TubeGeometry,
)

# ---------------------------------------------------------------------------
# reference parameter sets (kPa, kPa*s, degrees).  "media" = stiff inner
# layer, "adventitia" = compliant outer layer; the *_fast Maxwell constants
# give relaxation times ~0.1 s, the *_slow ones ~1 s.
# ---------------------------------------------------------------------------

MEDIA_EQ = dict(c1=3.0, c2=2.0, k1=2.3632, k2=0.8393, beta_deg=29.0)
ADV_EQ = dict(c1=0.3, c2=0.2, k1=0.562, k2=0.7112, beta_deg=62.0)

MEDIA_VISC_FAST = dict(mu=5.0, eta_matrix=0.5, k1v=5.3, k2v=0.8393, eta_fibre=0.53)
ADV_VISC_FAST = dict(mu=1.0, eta_matrix=0.1, k1v=1.3, k2v=0.7112, eta_fibre=0.13)
MEDIA_VISC_SLOW = dict(mu=5.0, eta_matrix=5.0, k1v=5.3, k2v=0.8393, eta_fibre=5.3)

# load-free two-layer tube whose stress-free sectors are sought (mm / deg)
T1_TUBE = TubeGeometry(ri=0.71, ro=1.1, l=3.0, r_interface=0.97)
T1_ALPHA_DEG = 160.0
T1_TARGET = dict(Ri_mm=1.3948, R_interface_mm=1.6589, Ro_mm=1.8024, L_mm=2.9251)

# per-layer stress-free sectors to be glued into one load-free tube
MEDIA_SECTOR = SectorGeometry(1.0, 1.4, 1.0, math.radians(160.0))
ADV_SECTOR = SectorGeometry(1.5, 1.8, 1.0, math.radians(140.0))
T3_TARGET = dict(r_i_mm=0.4852, r_interface_mm=0.8749, r_o_mm=1.1691, l_mm=1.0063)


def equilibrium_layers():
    """Media + adventitia equilibrium-only layers (inverse problem input)."""
    return [MaterialLayer.from_constants(**MEDIA_EQ),
            MaterialLayer.from_constants(**ADV_EQ)]


def sectored_layers():
    """Media + adventitia layers carrying their stress-free sectors."""
    return [MaterialLayer.from_constants(**MEDIA_EQ, sector=MEDIA_SECTOR),
            MaterialLayer.from_constants(**ADV_EQ, sector=ADV_SECTOR)]


@pytest.fixture
def two_layers():
    return equilibrium_layers()


@pytest.fixture
def t3_layers():
    return sectored_layers()


# ---------------------------------------------------------------------------
# random-tensor factories
# ---------------------------------------------------------------------------

def rand_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0.0:
        q[:, 0] = -q[:, 0]
    return q


def rand_spd(rng, lo=0.5, hi=2.0):
    """Random SPD 3x3 with eigenvalues uniform in [lo, hi]."""
    q = rand_rotation(rng)
    eig = rng.uniform(lo, hi, size=3)
    return (q * eig) @ q.T


def rand_unimodular(rng, spread=0.4):
    """Random well-conditioned F with det = 1."""
    while True:
        f = np.eye(3) + spread * rng.standard_normal((3, 3))
        d = np.linalg.det(f)
        if d > 0.3:
            return f * d ** (-1.0 / 3.0)


def rand_motion(rng, spread=0.3):
    """Random deformation gradient with a safely positive determinant."""
    while True:
        f = np.eye(3) + spread * rng.standard_normal((3, 3))
        if np.linalg.det(f) > 0.3:
            return f


def rand_unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def fd_pk2(energy, c, h=1e-6):
    """2 * d(energy)/dC by entrywise central differences (the gradient oracle)."""
    g = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            cp, cm = c.copy(), c.copy()
            cp[i, j] += h
            cm[i, j] -= h
            g[i, j] = (energy(cp) - energy(cm)) / (2.0 * h)
    return 2.0 * g


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def rk4_path(rhs, y0, t_end, dt):
    """Fixed-step classical RK4 on dy/dt = rhs(y); returns y(t_end)."""
    y = np.asarray(y0, dtype=float).copy()
    n = int(round(t_end / dt))
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def ode_reference(rhs, y0, t_eval):
    """High-accuracy adaptive Runge-Kutta reference trajectory (n_t, n_y)."""
    sol = solve_ivp(lambda t, y: rhs(y), (0.0, float(t_eval[-1])),
                    np.asarray(y0, dtype=float).ravel(),
                    t_eval=t_eval, rtol=1e-12, atol=1e-14)
    assert sol.success
    return sol.y.T
