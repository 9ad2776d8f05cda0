"""Mode extraction, truncation rules, plane-wave mapping, resynthesis."""

import math

import numpy as np
import pytest

from spatialanc import (
    ArrayGeometry,
    ModeCoefficients,
    PlaneWave,
    Scene,
    extract_modes,
    modes_from_plane_waves,
    sample_array,
    synthesize_field,
    true_mode_coefficients,
    truncation_order,
)
from spatialanc.errors import DomainError

C = 343.0


def k_of(f):
    return 2 * math.pi * f / C


def synth_on_array(beta: ModeCoefficients, arr: ArrayGeometry) -> np.ndarray:
    return np.array([synthesize_field(beta, (arr.radius, phi)) for phi in arr.angles])


def test_truncation_order_known_values():
    # 41-element Nyquist at radius 2 m and the error-array equivalent at 1 m
    assert truncation_order(k_of(546.0), 2.0) == 20
    assert truncation_order(k_of(1092.0), 1.0) == 20
    assert truncation_order(1e-9, 2.0) == 1


def test_truncation_order_e_rule():
    k = k_of(200.0)
    assert truncation_order(k, 2.0, rule="ceil-ekR/2") == math.ceil(
        0.5 * math.e * k * 2.0 * (1 - 1e-3)
    )
    with pytest.raises(ValueError):
        truncation_order(k, 2.0, rule="floor-kR")
    with pytest.raises(DomainError):
        truncation_order(-1.0, 2.0)


def test_round_trip_low_order():
    rng = np.random.default_rng(3)
    arr = ArrayGeometry(2.0, 41)
    k = k_of(400.0)
    beta = ModeCoefficients(
        order=5, coeffs=rng.standard_normal(11) + 1j * rng.standard_normal(11), k=k
    )
    samples = synth_on_array(beta, arr)
    got = extract_modes(samples, arr, k, 5)
    ok = ~got.unrecoverable
    np.testing.assert_allclose(got.coeffs[ok], beta.coeffs[ok], atol=1e-10)


def test_zero_samples_zero_modes():
    arr = ArrayGeometry(2.0, 41)
    got = extract_modes(np.zeros(41, dtype=complex), arr, k_of(300.0), 20)
    assert np.all(got.coeffs == 0.0)


def test_aliasing_above_nyquist():
    # plane wave well above the 41-element Nyquist: high-|m| modes corrupted
    arr = ArrayGeometry(2.0, 41)
    f = 900.0
    k = k_of(f)
    scene = Scene((PlaneWave(0.0),))
    got = extract_modes(sample_array(scene, f, arr), arr, k, 20)
    true = true_mode_coefficients(scene, f, 20)
    err = np.abs(got.coeffs - true.coeffs)
    err[got.unrecoverable] = 0.0
    high = np.abs(np.arange(-20, 21)) >= 12
    assert err[high].max() >= 0.1


def test_aliasing_theorem_order_limit():
    # extraction on Q elements is exact iff the field is order-limited to
    # M' <= (Q-1)/2
    rng = np.random.default_rng(11)
    k = k_of(350.0)
    arr = ArrayGeometry(2.0, 21)  # resolves orders up to 10
    for order_lim, exact in ((10, True), (11, False)):
        coeffs = np.zeros(2 * 15 + 1, dtype=complex)
        band = np.abs(np.arange(-15, 16)) <= order_lim
        coeffs[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        beta = ModeCoefficients(order=15, coeffs=coeffs, k=k)
        samples = synth_on_array(beta, arr)
        got = extract_modes(samples, arr, k, 10)
        ok = ~got.unrecoverable
        err = np.abs(got.coeffs - beta.coeffs[5:-5])[ok].max()
        if exact:
            assert err < 1e-10
        else:
            assert err > 1e-6


def test_modes_from_plane_waves_examples():
    k = k_of(500.0)
    gamma = np.zeros(8, dtype=complex)
    gamma[0] = 1.0
    angles = 2 * np.pi * np.arange(8) / 8
    beta = modes_from_plane_waves(gamma, angles, 6, k)
    ms = np.arange(-6, 7)
    np.testing.assert_allclose(beta.coeffs, 1j ** ms, rtol=1e-14)

    assert np.all(modes_from_plane_waves(np.zeros(8), angles, 6, k).coeffs == 0.0)

    gamma2 = np.zeros(8, dtype=complex)
    gamma2[0] = 1.0
    gamma2[4] = 1.0  # angle pi
    beta2 = modes_from_plane_waves(gamma2, angles, 6, k)
    expected = (1j ** ms) * (1.0 + (-1.0) ** ms)
    np.testing.assert_allclose(beta2.coeffs, expected, atol=1e-13)


def test_plane_wave_linearity_chain():
    # modes_from_plane_waves with the exact weights equals the analytic modes
    k = k_of(650.0)
    angles = 2 * np.pi * np.arange(128) / 128
    gamma = np.zeros(128, dtype=complex)
    gamma[17] = 0.8 - 0.1j
    gamma[90] = 1.1j
    scene = Scene((
        PlaneWave(angles[17], amplitude=0.8 - 0.1j),
        PlaneWave(angles[90], amplitude=1.1j),
    ))
    via_gamma = modes_from_plane_waves(gamma, angles, 20, k)
    analytic = true_mode_coefficients(scene, 650.0, 20)
    np.testing.assert_allclose(via_gamma.coeffs, analytic.coeffs, rtol=1e-12)


def test_synthesize_examples():
    k = k_of(400.0)
    zero = ModeCoefficients(order=4, coeffs=np.zeros(9), k=k)
    assert synthesize_field(zero, (0.5, 1.0)) == 0.0

    ms = np.arange(-10, 11)
    pw = ModeCoefficients(order=10, coeffs=1j ** ms, k=k)
    assert synthesize_field(pw, (0.0, 0.0)) == pytest.approx(1.0, rel=1e-14)

    # against the direct exponential, within the truncation-safe zone
    scene = Scene((PlaneWave(0.0),))
    beta = true_mode_coefficients(scene, 400.0, 20)
    r, phi = 1.0, 0.7
    expected = np.exp(1j * k * r * np.cos(phi))
    assert abs(synthesize_field(beta, (r, phi)) - expected) < 1e-6


def test_bessel_zero_flagging():
    # force flags with a generous threshold and check masking semantics
    arr = ArrayGeometry(2.0, 41)
    k = k_of(400.0)
    scene = Scene((PlaneWave(0.0),))
    samples = sample_array(scene, 400.0, arr)
    got = extract_modes(samples, arr, k, 20, bessel_eps=0.5)
    assert got.unrecoverable.any()
    assert np.all(got.coeffs[got.unrecoverable] == 0.0)
    # default threshold flags nothing at this frequency
    default = extract_modes(samples, arr, k, 20)
    assert not default.unrecoverable.any()


def test_mode_container_validation():
    with pytest.raises(ValueError):
        ModeCoefficients(order=2, coeffs=np.zeros(4), k=1.0)
    with pytest.raises(ValueError):
        ModeCoefficients(order=1, coeffs=np.array([1.0, np.inf, 0.0]), k=1.0)
    beta = ModeCoefficients(order=2, coeffs=np.arange(5, dtype=complex), k=1.0)
    assert beta[0] == 2.0
    assert beta[-2] == 0.0
    with pytest.raises(IndexError):
        beta[3]
