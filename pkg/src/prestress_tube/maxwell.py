"""Isotropic and fibre-like Maxwell bodies on the stress-free configuration.

Internal variables (per material point):

* Ci       -- inelastic right Cauchy-Green tensor of the isotropic branch,
              unimodular by construction of the flow and of the update;
* lambda_i -- inelastic stretch of each viscous fibre family.

Only these invariant combinations of the elastic/inelastic split are ever
needed, so the split factors themselves are never stored.

The isotropic update is the closed-form solution of implicit Euler applied to

    dCi/dt = (mu/eta) (Cbar Ci^{-1})^D Ci ,

namely  Ci_new = unimodular( Ci_old + (dt mu/eta) Cbar_new ),  which is
unconditionally stable and preserves det Ci = 1 exactly.  The fibre update is
backward Euler on x = ln(lambda_i) with a safeguarded Newton (bisection
fallback); the root is bracketed by [x_old, ln(lambda)] because the flow drives
lambda_i monotonically toward lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as tn
from .errors import NoConvergence, NonPositiveStretch
from .materials import PreStressField, csf_from_clf, sq_stretch_gradient

# fibre local solve
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
LAM_E_RANGE = (0.2, 5.0)  # outside this the exp() argument is meaningless; refuse the step


@dataclass(frozen=True)
class IsoMaxwellParams:
    """Neo-Hookean Maxwell branch of the matrix: shear modulus mu (kPa), viscosity eta (kPa s)."""
    mu: float
    eta: float

    def __post_init__(self):
        if self.mu <= 0.0 or self.eta <= 0.0:
            raise ValueError(f"need mu > 0 and eta > 0 (got mu={self.mu}, eta={self.eta})")


@dataclass(frozen=True)
class FibreMaxwellParams:
    """Viscous fibre family: k1v (kPa), k2v (dimensionless), eta_f (kPa s), unit direction a."""
    k1v: float
    k2v: float
    eta_f: float
    a: np.ndarray

    def __post_init__(self):
        if self.k1v <= 0.0 or self.k2v <= 0.0 or self.eta_f <= 0.0:
            raise ValueError(f"need k1v, k2v, eta_f > 0 (got {self.k1v}, {self.k2v}, {self.eta_f})")
        a = np.asarray(self.a, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("fibre direction must be unit length")
        object.__setattr__(self, 'a', a)


@dataclass
class ViscousState:
    """Internal variables of one material point (one isotropic branch + n fibre families)."""
    Ci: np.ndarray
    lambda_i: np.ndarray

    def __post_init__(self):
        self.Ci = np.asarray(self.Ci, dtype=float)
        self.lambda_i = np.atleast_1d(np.asarray(self.lambda_i, dtype=float))
        if abs(tn.det(self.Ci) - 1.0) > 1e-10:
            raise ValueError(f"Ci must be unimodular (det = {tn.det(self.Ci):.12f})")
        if not tn.is_symmetric(self.Ci):
            raise ValueError("Ci must be symmetric")
        if np.any(self.lambda_i <= 0.0):
            raise NonPositiveStretch("inelastic stretches must be positive")

    def copy(self):
        return ViscousState(self.Ci.copy(), self.lambda_i.copy())


# ---------------------------------------------------------------------------
# isotropic branch
# ---------------------------------------------------------------------------

def iso_energy(c_sf, ci, p: IsoMaxwellParams):
    """mu/2 (tr(Cbar Ci^{-1}) - 3), the stored energy of the elastic spring."""
    cbar = tn.unimodular(c_sf)
    return 0.5 * p.mu * (np.einsum('...ij,...ji->...', cbar, tn.inverse(ci)) - 3.0)


def iso_overstress(c_sf, ci, p: IsoMaxwellParams):
    """PK2 overstress mu C^{-1} (Cbar Ci^{-1})^D = 2 d(energy)/dC at fixed Ci."""
    c = np.asarray(c_sf, dtype=float)
    d = tn.det(c)
    ciinv = tn.inverse(ci)
    cbar = c * d[..., None, None] ** (-1.0 / 3.0)
    trterm = np.einsum('...ij,...ji->...', cbar, ciinv)
    # C^{-1} Cbar = (det C)^{-1/3} 1, so the product collapses to a symmetric form
    return p.mu * (d[..., None, None] ** (-1.0 / 3.0) * ciinv
                   - (trterm / 3.0)[..., None, None] * tn.inverse(c))


def iso_evolve_step(c_sf_new, ci_old, dt: float, p: IsoMaxwellParams):
    """One implicit step of the isotropic flow; returns the new (unimodular) Ci."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    ci_old = np.asarray(ci_old, dtype=float)
    if abs(tn.det(ci_old) - 1.0) > 1e-8:
        raise ValueError(f"det Ci_old = {tn.det(ci_old):.10f}, expected 1")
    cbar = tn.unimodular(c_sf_new)
    return tn.unimodular(ci_old + (dt * p.mu / p.eta) * cbar)


def iso_flow_rhs(c_sf, ci, p: IsoMaxwellParams):
    """Right-hand side (mu/eta) (Cbar Ci^{-1})^D Ci of the isotropic flow (for reference
    integrators and tests)."""
    cbar = tn.unimodular(c_sf)
    return (p.mu / p.eta) * tn.deviator(cbar @ tn.inverse(ci)) @ np.asarray(ci, dtype=float)


# ---------------------------------------------------------------------------
# fibre branch
# ---------------------------------------------------------------------------

def visc_fibre_f(lam2, k1v: float, k2v: float):
    """f_v(lam2) = 2 k1v (lam2 - 1) exp(k2v (lam2 - 1)^2) = d(energy)/d(lam2)."""
    u = np.asarray(lam2, dtype=float) - 1.0
    return 2.0 * k1v * u * np.exp(k2v * u * u)


def visc_fibre_energy(lam2, k1v: float, k2v: float):
    """k1v/k2v (exp(k2v (lam2 - 1)^2) - 1)."""
    u = np.asarray(lam2, dtype=float) - 1.0
    return k1v / k2v * (np.exp(k2v * u * u) - 1.0)


def fibre_overstress_scalar(lam, lam_i, p: FibreMaxwellParams):
    """Prefactor f_v(lam_e^2) / lam_i^2 with lam_e = lam/lam_i."""
    lam = np.asarray(lam, dtype=float)
    lam_i = np.asarray(lam_i, dtype=float)
    if np.any(lam <= 0.0) or np.any(lam_i <= 0.0):
        raise NonPositiveStretch("stretches must be positive")
    lam_e2 = (lam / lam_i) ** 2
    return visc_fibre_f(lam_e2, p.k1v, p.k2v) / lam_i ** 2


def fibre_overstress(c_sf, lam_i, p: FibreMaxwellParams):
    """(prefactor, PK2 overstress tensor) of one viscous fibre family.

    The tensor is 2 (f_v(lam_e^2)/lam_i^2) d(lam2)/dC, the exact C-gradient of
    the fibre energy at fixed lam_i.
    """
    grad, lam2 = sq_stretch_gradient(c_sf, p.a)
    pref = fibre_overstress_scalar(np.sqrt(lam2), lam_i, p)
    return pref, 2.0 * np.asarray(pref)[..., None, None] * grad


def fibre_flow_rhs(lam, lam_i, p: FibreMaxwellParams):
    """d(lambda_i)/dt = (lambda_i/eta) f_v(lam_e^2) lam_e^2 (for reference integrators)."""
    lam_e2 = (lam / lam_i) ** 2
    return lam_i / p.eta_f * visc_fibre_f(lam_e2, p.k1v, p.k2v) * lam_e2


def fibre_evolve_step(lam_new: float, lam_i_old: float, dt: float, p: FibreMaxwellParams) -> float:
    """Backward-Euler update of the inelastic fibre stretch.

    Solves  x = x_old + (dt/eta) f_v(u) u,  u = lam_new^2 exp(-2x),  for
    x = ln(lambda_i) with a bracketed Newton iteration.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if lam_new <= 0.0 or lam_i_old <= 0.0:
        raise NonPositiveStretch("stretches must be positive")
    lam_e0 = lam_new / lam_i_old
    if not LAM_E_RANGE[0] <= lam_e0 <= LAM_E_RANGE[1]:
        raise NoConvergence(f"elastic fibre stretch {lam_e0:.4f} outside safe range {LAM_E_RANGE}",
                            last_iterate=lam_i_old)

    x_old = math.log(lam_i_old)
    x_star = math.log(lam_new)  # fixed point of the flow
    lo, hi = min(x_old, x_star), max(x_old, x_star)
    lam2 = lam_new * lam_new
    k1v, k2v, eta = p.k1v, p.k2v, p.eta_f

    def resid(x):
        u = lam2 * math.exp(-2.0 * x) - 1.0
        e = math.exp(k2v * u * u)
        fv = 2.0 * k1v * u * e
        h = fv * (u + 1.0)                      # f_v(lam_e^2) lam_e^2
        dfv = 2.0 * k1v * e * (1.0 + 2.0 * k2v * u * u)
        hp = dfv * (u + 1.0) + fv               # dh/du
        r = x - x_old - dt / eta * h
        dr = 1.0 + dt / eta * 2.0 * (u + 1.0) * hp  # du/dx = -2(u+1)
        return r, dr

    x = 0.5 * (lo + hi)
    r, dr = resid(x)
    for _ in range(NEWTON_MAXIT):
        if abs(r) < NEWTON_TOL:
            return math.exp(x)
        if r > 0.0:
            hi = x
        else:
            lo = x
        step = r / dr if dr != 0.0 else math.inf
        x_new = x - step
        if not lo < x_new < hi:          # Newton left the bracket: bisect
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            return math.exp(x)
        x = x_new
        r, dr = resid(x)
    raise NoConvergence("fibre stretch update did not converge "
                        f"(dt={dt}, lam={lam_new}, lam_i={lam_i_old})",
                        last_iterate=math.exp(x), residuals={'r': r})


# ---------------------------------------------------------------------------
# assembled overstress and initial conditions
# ---------------------------------------------------------------------------

def overstress_pk2_sf(c_sf, state: ViscousState, iso, fibres):
    """Total viscous PK2 overstress (isotropic branch, if any, + all fibre families)."""
    t = iso_overstress(c_sf, state.Ci, iso) if iso is not None else \
        np.zeros(np.shape(c_sf))
    for fp, li in zip(fibres, state.lambda_i):
        t = t + fibre_overstress(c_sf, li, fp)[1]
    return t


def initial_state(f0: PreStressField, c_lf_initial, fibres) -> ViscousState:
    """Relaxed-in-the-load-free-state initial conditions.

    Ci = Cbar_sf at t = 0 and lambda_i = lambda at t = 0, so that every
    overstress vanishes identically at the start of the run.
    """
    c_sf0 = csf_from_clf(c_lf_initial, f0)
    cbar0 = tn.unimodular(c_sf0)
    lam_i0 = [math.sqrt(float(np.einsum('ij,i,j->', cbar0, fp.a, fp.a))) for fp in fibres]
    return ViscousState(cbar0, np.asarray(lam_i0, dtype=float))
