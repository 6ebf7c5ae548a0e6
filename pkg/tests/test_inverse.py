import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicstring.inverse import (
    NormalizationDefectError,
    SpectralDataError,
    SpectrumFile,
    check_admissibility,
    forward_spectra,
    four_spectra,
    fourier_g,
    fourier_g_quadrature,
    partition_spectra,
    recover_c,
    recover_masses,
    recover_potential,
    window_spectra,
)
from cubicstring.spectral_l0 import L0Config, l0_levels
from cubicstring.transforms import Potential, char_alpha, l0_coefficients

CFG = L0Config(k_max=40)


@pytest.fixture(scope="module")
def levels():
    return l0_levels(CFG)


def _coeff_potential(seed, kmax=3):
    rng = np.random.default_rng(seed)
    entries = [(k, e, complex(*rng.normal(size=2))) for k in range(1, kmax + 1) for e in (1, -1)]
    return Potential.from_coeffs(CFG, entries)


def test_two_level_masses():
    s0 = SpectrumFile.from_values([-1.0, 1.0], 1.0)
    sa = SpectrumFile.from_values([(1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2], 1.0)
    res = recover_masses(s0, sa)
    np.testing.assert_allclose(res.masses, [0.5, 0.5], rtol=1e-14)
    assert res.alpha == pytest.approx(1.0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.floats(-2.0, 2.0).filter(lambda a: abs(a) > 0.05))
def test_masses_round_trip(seed, alpha):
    v = _coeff_potential(seed)
    lv = l0_levels(CFG)
    s0, sa = forward_spectra(v, alpha, CFG, lv)
    res = recover_masses(s0, sa)
    np.testing.assert_allclose(res.masses, alpha * np.abs(l0_coefficients(v, lv)) ** 2, atol=1e-10)
    assert res.alpha == pytest.approx(alpha, rel=1e-9)


def test_constant_matches_char_alpha(levels):
    v = Potential.from_function(lambda x: np.exp(-((x - 0.4) / 0.2) ** 2) + 0.3j * x)
    big = l0_levels(L0Config(k_max=300))
    s0, sa = forward_spectra(v, 0.5, L0Config(k_max=300), big)
    c, _ = recover_c(s0, sa)
    assert c == pytest.approx(char_alpha(v, 0.5, 0.0).real, rel=1e-6)


def test_probe_coefficients_closed_form(levels):
    for p in levels[::5]:
        assert abs(fourier_g(CFG, p) - fourier_g_quadrature(CFG, p)) < 1e-12


def test_four_spectra_round_trip(levels):
    v = _coeff_potential(4)
    spectra = four_spectra(v, 0.9, CFG, levels)
    res = recover_potential(*spectra, CFG, levels)
    np.testing.assert_allclose(res.v_coeffs, l0_coefficients(v, levels), atol=1e-9)
    assert res.alpha == pytest.approx(0.9, rel=1e-10)
    assert res.residuals["normalization_defect"] < 1e-9


def test_four_spectra_defect_detected(levels):
    # a constant potential has a long L0 tail that six levels cannot hold
    v = Potential.from_function(lambda x: np.ones_like(x, dtype=complex))
    spectra = four_spectra(v, 0.5, L0Config(k_max=3), l0_levels(L0Config(k_max=3)))
    with pytest.raises(NormalizationDefectError):
        recover_potential(*spectra, L0Config(k_max=3))


def test_window_keeps_inner_levels():
    lv = l0_levels(L0Config(k_max=60))
    s0, sa = forward_spectra(_coeff_potential(1), 0.4, L0Config(k_max=60), lv)
    w0, wa = window_spectra(s0, sa, 20)
    assert w0.N == wa.N == 40
    assert np.max(np.abs(w0.expanded)) < np.min(np.abs(s0.expanded[[0, -1]]))


def test_partition_flags_bad_data():
    s0 = SpectrumFile.from_values([-2.0, -1.0, 1.0, 2.0], 1.0)
    with pytest.raises(SpectralDataError):
        partition_spectra(s0, SpectrumFile.from_values([-1.5, 0.0, 1.5], 1.0))
    with pytest.raises(SpectralDataError):
        partition_spectra(s0, SpectrumFile.from_values([-1.5, -1.2, 1.5, 2.5], 1.0))


def test_interlacing_data_always_gives_positive_masses():
    # strict interlacing on a finite window forces one common mass sign
    s0 = SpectrumFile.from_values([1.0, 2.0, 3.0], 1.0)
    res = recover_masses(s0, SpectrumFile.from_values([1.9, 2.1, 3.5], 1.0))
    assert np.all(res.masses > 0)


def test_admissibility_accepts_forward_data(levels):
    s0, sa = forward_spectra(_coeff_potential(2), -0.7, CFG, levels)
    rep = check_admissibility(s0, sa)
    assert rep.accepted and rep.interlaces and rep.sigma0_overlap_count == 0


def test_admissibility_rejects_slow_series(levels):
    # every level pushed a fixed fraction of the way to its neighbour: masses do not decay
    s0 = SpectrumFile.from_levels(levels, 1.0)
    z = s0.expanded
    mu = np.append(z[:-1] + 0.3 * np.diff(z), z[-1] + 1.0)
    rep = check_admissibility(s0, SpectrumFile.from_values(mu, 1.0))
    assert rep.reason in ("log_series", "mass_series")


def test_spectrum_file_json_round_trip():
    s = SpectrumFile.from_values([-3.0, 1.0, 1.0, 2.5], 2.0)
    t = SpectrumFile.from_json(s.to_json())
    assert list(t.multiplicities) == [1, 2, 1] and t.l == 2.0 and t.N == 4
    with pytest.raises(ValueError):
        SpectrumFile([2.0, 1.0], [1, 1], 1.0, 2)
    with pytest.raises(ValueError):
        SpectrumFile.from_dict({"eigenvalues": [1.0]})
