"""Opened-sector energy, inner equilibration, and the locking-angle scan."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from prestress_tube import (
    MaterialLayer,
    OpenedStateCandidate,
    SectorGeometry,
    equilibrate_opened,
    equilibrium_energy_sf,
    find_opening_angle,
    net_pressure,
    opened_energy,
    opened_segments,
    reduced_axial_force,
    solve_load_free,
)
from prestress_tube import tensor as tn

from conftest import MEDIA_EQ, MEDIA_SECTOR, sectored_layers

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# energy evaluation
# ---------------------------------------------------------------------------

def test_opened_energy_matches_fine_trapezoid(t3_layers):
    cand = OpenedStateCandidate(math.radians(40.0), 1.05, 1.1)
    e_gauss = opened_energy(t3_layers, cand)
    e_trap = 0.0
    for seg in opened_segments(t3_layers, cand):
        sec = seg.layer.sector
        R = np.linspace(sec.Ri, sec.Ro, 20001)
        rho = seg.radius_current(R)
        F = seg.deformation_gradient(rho, R)
        w = equilibrium_energy_sf(tn.transpose(F) @ F, seg.layer.equilibrium)
        e_trap += (TWO_PI - sec.alpha) * sec.L * np.trapezoid(w * R, R)
    assert e_gauss == pytest.approx(e_trap, rel=1e-6)


def test_opened_energy_zero_at_own_sector():
    # a single layer opened to its own angle at its own geometry is unstrained
    layer = MaterialLayer.from_constants(**MEDIA_EQ, sector=MEDIA_SECTOR)
    cand = OpenedStateCandidate(MEDIA_SECTOR.alpha, MEDIA_SECTOR.Ro, MEDIA_SECTOR.L)
    assert opened_energy([layer], cand) == pytest.approx(0.0, abs=1e-14)
    segs = opened_segments([layer], cand)
    R = np.linspace(MEDIA_SECTOR.Ri, MEDIA_SECTOR.Ro, 5)
    F = segs[0].deformation_gradient(segs[0].radius_current(R), R)
    assert_allclose(F, np.broadcast_to(np.eye(3), (5, 3, 3)), atol=1e-12)


def test_opened_energy_positive_off_equilibrium(t3_layers):
    cand = OpenedStateCandidate(math.radians(40.0), 1.05, 1.1)
    assert opened_energy(t3_layers, cand) > 0.0


# ---------------------------------------------------------------------------
# inner equilibration at fixed trial angle
# ---------------------------------------------------------------------------

def test_equilibrate_single_layer_recovers_sector():
    layer = MaterialLayer.from_constants(**MEDIA_EQ, sector=MEDIA_SECTOR)
    cand, e = equilibrate_opened([layer], MEDIA_SECTOR.alpha)
    assert cand.rho_interface == pytest.approx(MEDIA_SECTOR.Ro, abs=1e-6)
    assert cand.l_open == pytest.approx(MEDIA_SECTOR.L, abs=1e-6)
    assert e == pytest.approx(0.0, abs=1e-12)


def test_equilibrate_closed_matches_load_free(t3_layers):
    # trial angle 0 closes the sector into a tube: must agree with the
    # load-free equilibrium solver (cross-module consistency)
    cand, e = equilibrate_opened(t3_layers, 0.0)
    sol = solve_load_free(t3_layers)
    assert cand.rho_interface == pytest.approx(sol.tube.r_interface, abs=1e-5)
    assert cand.l_open == pytest.approx(sol.tube.l, abs=1e-5)
    assert e > 0.0


def test_equilibrated_state_is_stationary_and_balanced(t3_layers):
    alpha = math.radians(124.0)
    cand, e = equilibrate_opened(t3_layers, alpha)
    # energy stationarity in both inner unknowns
    for dx in ((1e-5, 0.0), (0.0, 1e-5)):
        up = OpenedStateCandidate(alpha, cand.rho_interface + dx[0], cand.l_open + dx[1])
        dn = OpenedStateCandidate(alpha, cand.rho_interface - dx[0], cand.l_open - dx[1])
        slope = (opened_energy(t3_layers, up) - opened_energy(t3_layers, dn)) / (2e-5)
        assert abs(slope) < 1e-6
    # stationarity coincides with sector equilibrium (net traction balance)
    segs = opened_segments(t3_layers, cand)
    assert abs(net_pressure(segs)) < 1e-7
    assert abs(reduced_axial_force(segs)) < 1e-7


# ---------------------------------------------------------------------------
# angle scan and locking
# ---------------------------------------------------------------------------

def test_scan_finds_common_angle_of_compatible_layers():
    # one body split into two stacked layers of the same material and angle:
    # the composite relaxes exactly at that angle with zero energy
    inner = MaterialLayer.from_constants(
        **MEDIA_EQ, sector=SectorGeometry(1.0, 1.2, 1.0, math.radians(160.0)))
    outer = MaterialLayer.from_constants(
        **MEDIA_EQ, sector=SectorGeometry(1.2, 1.4, 1.0, math.radians(160.0)))
    curve = find_opening_angle([inner, outer], 150.0, 170.0, 2.0, threads=1)
    assert curve.argmin_deg == pytest.approx(160.0, abs=0.2)
    # refinement stops at 0.1 deg, so e_min carries a small quadratic remnant
    assert curve.e_min_microj == pytest.approx(0.0, abs=1e-8)
    # at the exact common angle the composite is strain-free
    assert equilibrate_opened([inner, outer], math.radians(160.0))[1] == \
        pytest.approx(0.0, abs=1e-12)


def test_scan_locking_regression(t3_layers):
    # incompatible layers lock each other: argmin falls well below both
    # individual opening angles (140 and 160 degrees)
    curve = find_opening_angle(t3_layers, 100.0, 150.0, 2.0, threads=2)
    assert curve.argmin_deg == pytest.approx(124.6, abs=0.2)
    assert curve.e_min_microj == pytest.approx(0.029851, rel=1e-3)
    assert curve.argmin_deg < 140.0
    samples = dict(curve.samples)
    assert min(samples) == 100.0 and max(samples) == 150.0
    assert curve.e_min_microj <= min(samples.values()) + 1e-12
    # equilibrated candidate is returned for downstream stress evaluation
    assert curve.candidate.rho_interface > 0.0
    assert curve.candidate.l_open > 0.0


def test_scan_endpoint_energies(t3_layers):
    # frozen endpoints of the full curve (regression against convention drift)
    e0 = equilibrate_opened(t3_layers, 0.0)[1]
    e180 = equilibrate_opened(t3_layers, math.radians(180.0))[1]
    assert e0 == pytest.approx(0.155060, rel=1e-3)
    assert e180 == pytest.approx(0.056540, rel=1e-3)


def test_scan_thread_count_does_not_change_samples(t3_layers, monkeypatch):
    curve1 = find_opening_angle(t3_layers, 120.0, 130.0, 5.0, threads=1)
    monkeypatch.setenv("PRESTRESS_TUBE_THREADS", "3")
    curve3 = find_opening_angle(t3_layers, 120.0, 130.0, 5.0)
    for (a1, e1), (a3, e3) in zip(curve1.samples, curve3.samples):
        assert a1 == a3
        assert e1 == pytest.approx(e3, rel=1e-12, abs=1e-15)


def test_scan_rejects_bad_grid(t3_layers):
    with pytest.raises(ValueError):
        find_opening_angle(t3_layers, 10.0, 5.0, 2.0)
    with pytest.raises(ValueError):
        find_opening_angle(t3_layers, 0.0, 10.0, 0.0)
