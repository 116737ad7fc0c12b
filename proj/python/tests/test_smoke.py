import math

import pytest

import casimirkit as ck

HBAR = 1.054571817e-34
C = 299792458.0


def test_ideal_force_matches_closed_form():
    z, r = 1e-6, 294.3e-6
    ideal = ck.DielectricModel.perfect_conductor()
    f = ck.force_sphere_plane(z, r, ideal, ideal).value
    assert f == pytest.approx(-math.pi**3 * HBAR * C * r / (360 * z**3), rel=1e-4)


def test_drude_below_ideal():
    z, r = 0.5e-6, 294.3e-6
    f = ck.force_sphere_plane(z, r, ck.DielectricModel.gold(), ck.DielectricModel.copper()).value
    assert 0 < f / ck.ideal_force_sphere_plane(z, r) < 1


def test_calibration_round_trip():
    truth = ck.CalibrationParams(50280.0, 0.6325, 294.3e-6, 39.4e-9)
    samples = ck.synthesize_samples(truth, [0.3e-6, 0.6e-6, 1e-6, 2e-6, 4e-6],
                                    [-0.2, 0.1, 0.4, 0.9, 1.3, 1.8])
    fit = ck.calibrate(samples, ck.initial_guess(samples, 300e-6))
    assert fit.k == pytest.approx(truth.k, rel=1e-6)
    assert fit.v0 == pytest.approx(truth.v0, rel=1e-6)


def test_single_voltage_is_unidentifiable():
    truth = ck.CalibrationParams(50280.0, 0.6325, 294.3e-6, 39.4e-9)
    samples = ck.synthesize_samples(truth, [0.3e-6, 0.6e-6, 1e-6, 2e-6], [0.4])
    with pytest.raises(ck.IdentifiabilityError):
        ck.calibrate(samples, truth)


def test_frequency_shift():
    p = ck.OscillatorParams.reference()
    df = (ck.resonant_frequency(p, 1e-6) - p.omega0) / (2 * math.pi)
    assert df == pytest.approx(-23.9e-3, abs=1e-4)


def test_yukawa_limit_is_linear():
    a1 = ck.alpha_limit_default(lambda z: 1e-12, 200e-9, [0.2e-6, 0.5e-6])
    a2 = ck.alpha_limit_default(lambda z: 2e-12, 200e-9, [0.2e-6, 0.5e-6])
    assert a2 == 2 * a1


def test_domain_errors_surface():
    with pytest.raises(ValueError):
        ck.ideal_force_sphere_plane(-1.0, 1e-4)
