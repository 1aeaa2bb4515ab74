import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail import kerr
from dualrail.params import DEVICE, TWO_PI, SystemParams

W = TWO_PI  # 1 MHz as an angular frequency in rad/us


def _junction(**kw):
    base = dict(E_J=20.0, phi_a=0.02, phi_b=0.0118, phi_q=0.3, epsilon_d=W * 50, omega_q=TWO_PI * 6.0, omega_d=TWO_PI * 5.5)
    base.update(kw)
    return kerr.JosephsonExpansion(**base)


def test_kerr_scaling_with_phase():
    base = kerr.derive_effective_params(_junction())
    doubled = kerr.derive_effective_params(_junction(phi_q=0.6))
    assert doubled.K["q"] == pytest.approx(16 * base.K["q"])
    assert doubled.chi["bq"] == pytest.approx(4 * base.chi["bq"])
    assert doubled.chi["ab"] == pytest.approx(base.chi["ab"])


def test_kerr_linear_in_ej():
    base = kerr.derive_effective_params(_junction())
    twice = kerr.derive_effective_params(_junction(E_J=40.0))
    for k in base.K:
        assert twice.K[k] == pytest.approx(2 * base.K[k])
    for k in base.chi:
        assert twice.chi[k] == pytest.approx(2 * base.chi[k])


def test_pump_rate_matches_substitution():
    # choose phi_b so chi_bq hits the measured value, then Omega / xi^* = E_J phi_b phi_q^3
    e_j, phi_q = 20.0, 0.3
    phi_b = math.sqrt(0.251 / (1e3 * e_j * phi_q**2))
    eff = kerr.derive_effective_params(_junction(E_J=e_j, phi_b=phi_b, phi_q=phi_q))
    assert eff.chi["bq"] == pytest.approx(DEVICE.chi_bq, rel=1e-12)
    ej = TWO_PI * 1e3 * e_j
    assert eff.Omega / np.conj(eff.xi) == pytest.approx(ej * phi_b * phi_q**3, rel=1e-12)
    assert eff.Omega / np.conj(eff.xi) == pytest.approx(math.sqrt(2 * eff.chi["bq"] * eff.K["q"]), rel=1e-12)
    assert abs(eff.Omega_eh) == pytest.approx(math.sqrt(1.5) * abs(eff.Omega))
    assert eff.stark["q"] == pytest.approx(0.5 * eff.K["q"] * abs(eff.xi) ** 2)


def test_resonant_drive_rejected():
    with pytest.raises(ZeroDivisionError):
        kerr.derive_effective_params(_junction(omega_d=TWO_PI * 6.0))
    with pytest.raises(ValueError):
        _junction(phi_a=0.0)


def test_hamiltonian_without_pump_is_diagonal():
    h = kerr.build_chi_hamiltonian(DEVICE, kerr.PumpParams(0.0, W * 0.7), n_b_max=3, n_a=1)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    for q in range(4):
        for n in range(4):
            i = kerr.state_index(q, n)
            expected = W * 0.7 * n + DEVICE.chi_aq * q + DEVICE.chi_bq * q * n
            assert h[i, i].real == pytest.approx(expected)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-10, 10), st.floats(0, 3), st.floats(0, 2 * math.pi), st.booleans(), st.integers(2, 5)
)
def test_hamiltonian_hermitian_and_block(delta_mhz, omega_mhz, phase, dropped, nmax):
    omega = W * omega_mhz * complex(math.cos(phase), math.sin(phase))
    delta = W * delta_mhz
    h = kerr.build_chi_hamiltonian(DEVICE, kerr.PumpParams(omega, delta), nmax, include_dropped=dropped)
    assert kerr.fock.is_hermitian(h)
    i, j = kerr.state_index(kerr.E, 1, nmax), kerr.state_index(kerr.H, 0, nmax)
    block = h[np.ix_([i, j], [i, j])]
    np.testing.assert_allclose(block, [[delta + DEVICE.chi_bq, omega], [np.conj(omega), 0]], atol=1e-12)
    # the pair only couples to itself
    mask = np.ones(h.shape[0], bool)
    mask[[i, j]] = False
    assert np.abs(h[np.ix_([i, j], np.flatnonzero(mask))]).max() == 0
    lp, lm = kerr.two_level_eigen(-(delta + DEVICE.chi_bq), omega)
    np.testing.assert_allclose(np.linalg.eigvalsh(block), [lm, lp], atol=1e-10)


def test_invalid_truncation():
    with pytest.raises(kerr.fock.InvalidDimensionError):
        kerr.build_chi_hamiltonian(DEVICE, kerr.PumpParams(W), n_b_max=1)


def test_two_level_examples():
    lp, lm = kerr.two_level_eigen(0.0, W)
    assert (lp, lm) == (pytest.approx(W), pytest.approx(-W))
    lp, _ = kerr.two_level_eigen(10 * W, W)
    assert lp / W == pytest.approx(-5 + 0.5 * math.sqrt(104), abs=1e-12)
    assert lp / W == pytest.approx(0.0990, abs=5e-5)


def test_two_level_matches_dense_solver():
    rng = np.random.default_rng(20240611)
    n = 10_000
    delta = rng.uniform(-20, 20, n) * W
    omega = rng.uniform(0, 5, n) * W * np.exp(1j * rng.uniform(0, 2 * math.pi, n))
    m = np.zeros((n, 2, 2), complex)
    m[:, 0, 0] = -delta
    m[:, 0, 1] = omega
    m[:, 1, 0] = np.conj(omega)
    w = np.linalg.eigvalsh(m)
    lp, lm = kerr.two_level_eigen(delta, omega)
    assert np.abs(w[:, 1] - lp).max() <= 1e-12
    assert np.abs(w[:, 0] - lm).max() <= 1e-12


def test_dispersive_shift():
    assert kerr.dispersive_shift(W, 0.0) == 0
    assert kerr.dispersive_shift(10 * W, W) == pytest.approx(0.1 * W)
    with pytest.raises(ZeroDivisionError):
        kerr.dispersive_shift(0.0, W)
    with pytest.warns(UserWarning):
        kerr.dispersive_shift(W, 0.5 * W)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 50), st.floats(0, 0.2), st.booleans())
def test_dispersive_shift_series_bound(delta_mhz, ratio, negative):
    delta = (-1 if negative else 1) * W * delta_mhz
    omega = ratio * abs(delta)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        approx = kerr.dispersive_shift(delta, omega)
    lp, lm = kerr.two_level_eigen(delta, omega)
    # the dressed level continuously connected to zero
    exact = lp if delta > 0 else lm
    assert abs(approx - exact) <= 2 * ratio**4 * abs(delta) + 1e-12


def _grids(center=-DEVICE.chi_bq, span=4.0, t_max=3.0, n_t=241):
    return center + W * np.linspace(-span / 2, span / 2, 41), np.linspace(0, t_max, n_t)


def test_chevron_resonant_period():
    omega = W * 0.98
    t = np.array([0.0, math.pi / (2 * omega), math.pi / omega])
    scan = kerr.chevron_scan(DEVICE, omega, [-DEVICE.chi_bq], t)[0]
    np.testing.assert_allclose(scan, [1.0, 0.0, 1.0], atol=1e-12)
    assert math.pi / omega == pytest.approx(0.51, abs=0.005)


def test_chevron_without_pump_is_flat():
    d, t = _grids()
    np.testing.assert_allclose(kerr.chevron_scan(DEVICE, 0.0, d, t), 1.0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-3, 3))
def test_chevron_matches_rabi_formula(omega_mhz, detune_mhz):
    omega = W * omega_mhz
    delta = -DEVICE.chi_bq + W * detune_mhz
    t = np.linspace(0, 4, 60)
    scan = kerr.chevron_scan(DEVICE, omega, [delta], t)
    np.testing.assert_allclose(scan, kerr.rabi_model([delta], t, omega, -DEVICE.chi_bq), atol=1e-10)
    d = W * detune_mhz
    amp = 4 * omega**2 / (d**2 + 4 * omega**2)
    assert 1 - scan.min() <= amp + 1e-10


def test_chevron_block_conserves_probability():
    omega = W * 0.98
    h = kerr.build_chi_hamiltonian(DEVICE, kerr.PumpParams(omega, W * 0.4))
    w, v = np.linalg.eigh(h)
    i, j = kerr.state_index(kerr.E, 1), kerr.state_index(kerr.H, 0)
    psi0 = np.zeros(h.shape[0], complex)
    psi0[i] = 1
    for t in np.linspace(0, 5, 23):
        psi = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))
        assert abs(psi[i]) ** 2 + abs(psi[j]) ** 2 == pytest.approx(1, abs=1e-10)


@settings(max_examples=12, deadline=None)
@given(st.floats(0.2, 2.0))
def test_fit_rabi_roundtrip(omega_mhz):
    omega = W * omega_mhz
    d, t = _grids(t_max=6.0, n_t=481)
    scan = kerr.chevron_scan(DEVICE, omega, d, t)
    fit_omega, center = kerr.fit_rabi(scan, d, t)
    assert fit_omega == pytest.approx(omega, rel=0.01)
    assert center == pytest.approx(-DEVICE.chi_bq, abs=W * 0.01)


def test_fit_rabi_shifted_center():
    shifted = dataclasses.replace(DEVICE, chi_bq=DEVICE.chi_bq - W * 0.3)
    d, t = _grids(center=-DEVICE.chi_bq)
    scan = kerr.chevron_scan(shifted, W * 0.98, d, t)
    _, center = kerr.fit_rabi(scan, d, t)
    resolution = d[1] - d[0]
    assert abs(center - (-DEVICE.chi_bq + W * 0.3)) <= resolution


def test_fit_rabi_flat_scan_raises():
    d, t = _grids()
    with pytest.raises(kerr.NoOscillationError):
        kerr.fit_rabi(np.ones((d.size, t.size)), d, t)
    with pytest.raises(ValueError):
        kerr.fit_rabi(np.ones((3, 3)), d, t)


def test_fit_rabi_needs_a_full_period():
    d = -DEVICE.chi_bq + W * np.linspace(-2, 2, 21)
    t = np.linspace(0, 0.3, 40)
    scan = kerr.chevron_scan(DEVICE, W * 0.98, d, t)
    with pytest.raises(kerr.NoOscillationError):
        kerr.fit_rabi(scan, d, t)


def test_points_per_period():
    t = np.linspace(0, 1, 101)
    assert kerr.points_per_period(W * 0.5, t) == pytest.approx(100)
    assert kerr.points_per_period(0.0, t) == math.inf


def test_chevron_csv_roundtrip(tmp_path):
    d, t = _grids(n_t=31)
    scan = kerr.chevron_scan(DEVICE, W, d, t)
    path = tmp_path / "scan.csv"
    kerr.write_chevron_csv(path, d, t, scan)
    d2, t2, s2 = kerr.read_chevron_csv(path)
    np.testing.assert_allclose(d2, d, rtol=1e-15)
    np.testing.assert_array_equal(t2, t)
    np.testing.assert_array_equal(s2, scan)
    first = path.read_text().splitlines()[1].split(",")[0]
    assert float(first) == pytest.approx(d[0] / TWO_PI)


def test_system_params_validation():
    assert DEVICE.delta_kappa == pytest.approx(1.115)
    assert DEVICE.round_duration_ms == pytest.approx(0.012)
    with pytest.raises(ValueError):
        SystemParams(kappa_a=-1)
    with pytest.raises(ValueError):
        SystemParams(n_th_a=1.0)
    with pytest.raises(ValueError):
        SystemParams(round_duration=0)
