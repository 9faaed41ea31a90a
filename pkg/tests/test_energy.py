import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from qpcasimir.energy import (
    DD_ENERGY_SCALE,
    IDEAL,
    POLYLOG_N2,
    POLYLOG_N3,
    QUADRATURE,
    EnergyResult,
    FitRefused,
    energy_general,
    energy_ideal,
    energy_ideal_iterate,
    energy_pair,
    energy_triple,
    energy_word,
    growth_fit,
    ideal_growth_fit,
    sigma_grid,
    sweep,
    triple_roots,
)
from qpcasimir.errors import ConfigError, NumericalError
from qpcasimir.lattice import iterate, preset
from qpcasimir.optics import Plate
from qpcasimir.scattering import Stack

D, N = Plate.dielectric, Plate.permeable
DI, NI = Plate.ideal_conductor(), Plate.ideal_permeable()
SIGMAS = (0.1, 1.0, 2.0, 10.0, 100.0)


def pair_oracle_2d(sigma):
    """Two D" plates at a = 1, integrated directly over (zeta, kperp)."""
    def f(k, z):
        kap = math.hypot(k, z)
        t = z / kap
        rh = sigma / (sigma + 2 * t)
        re = -sigma * t / (sigma * t + 2)
        e = math.exp(-2 * kap)
        return k * (math.log1p(-rh * rh * e) + math.log1p(-re * re * e))

    v, _ = sp_integrate.dblquad(f, 0, 40, 0, 40, epsabs=1e-13, epsrel=1e-12)
    return v / (4 * math.pi**2) / DD_ENERGY_SCALE


def pair_oracle_mp(sigma, unlike=True):
    sigma = mpmath.mpf(sigma)

    def f(t):
        rh = sigma / (sigma + 2 * t)
        re = -sigma * t / (sigma * t + 2)
        if unlike:
            return mpmath.polylog(4, rh * re) * 2
        return mpmath.polylog(4, rh * rh) + mpmath.polylog(4, re * re)

    pts = [0, 2 / sigma, 20 / sigma, 0.1, 1] if sigma > 20 else [0, 0.05, 1]
    return float(-45 / mpmath.pi**4 * mpmath.quad(f, pts))


# ---------------------------------------------------------------- ideal words


def test_ideal_pairs():
    assert energy_ideal("DN").exact == Fraction(7, 8)
    assert energy_ideal("DD").exact == -1
    assert energy_ideal("NN").value == -1.0
    assert energy_ideal("D").exact == 0


def test_ideal_fibonacci_ladder():
    fib = preset("fibonacci")
    got = [energy_ideal(iterate(fib, i)).exact for i in range(1, 5)]
    assert got == [Fraction(7, 8), Fraction(7, 4), Fraction(13, 8), Fraction(17, 4)]
    assert all(energy_ideal_iterate(fib, i).exact == g for i, g in zip(range(1, 5), got))


def test_ideal_result_fields():
    res = energy_ideal("DNDDN", spacing=2.0)
    assert res.method == IDEAL and res.abs_error == 0.0 and res.n_plates == 5
    assert res.raw == pytest.approx(1.625 * math.pi**2 / 720 / 8)
    with pytest.raises(ConfigError):
        energy_ideal("DXN")
    with pytest.raises(ConfigError):
        energy_ideal("DN", spacing=0.0)


def test_result_validation():
    with pytest.raises(ConfigError):
        EnergyResult(1.0, -1.0, IDEAL, 2)
    with pytest.raises(ConfigError):
        EnergyResult(1.0, 0.0, "guess", 2)


# ---------------------------------------------------------------- pairs and triples


def test_pair_ideal_boyer():
    assert energy_pair(DI, NI).value == pytest.approx(0.875, abs=1e-12)
    assert energy_pair("D", "D").value == pytest.approx(-1.0, abs=1e-12)


def test_pair_zero_sigma_is_exact_zero():
    assert energy_pair("D", "N", sigma=0.0).value == 0.0
    assert energy_triple("D", "N", "D", sigma=0.0).value == 0.0


def test_pair_against_2d_oracle():
    got = energy_pair("D", "D", sigma=1.0)
    assert got.method == POLYLOG_N2
    assert got.value == pytest.approx(pair_oracle_2d(1.0), abs=1e-8)


@pytest.mark.parametrize("sigma", [0.05, 3.0, 1e4])
def test_pair_against_mpmath(sigma):
    assert energy_pair("D", "N", sigma=sigma).value == pytest.approx(
        pair_oracle_mp(sigma), abs=1e-10)
    assert energy_pair("N", "N", sigma=sigma).value == pytest.approx(
        pair_oracle_mp(sigma, unlike=False), abs=1e-10)


def test_pair_saturation_is_slow():
    # the grazing TE coupling vanishes for t < 2/sigma; the deficit is ~ ln(sigma)/sigma
    gaps = [0.875 - energy_pair("D", "N", sigma=s).value for s in (1e2, 1e3, 1e4, 1e5)]
    assert all(g > 0 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[2] == pytest.approx(1.51e-3, abs=2e-5)


def test_pair_monotone_and_bounded():
    vals = [energy_pair("D", "N", sigma=s).value for s in np.logspace(0, 4, 12)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert max(vals) < 0.875


def test_pair_rejects_kappa_dependent_plates():
    with pytest.raises(ConfigError):
        energy_pair(Plate.general(1.0, 0.0), DI)


@pytest.mark.parametrize("sigma", SIGMAS)
def test_fast_paths_match_general(sigma):
    pair = energy_pair("D", "N", sigma=sigma)
    gen2 = energy_general(Stack.equally_spaced([D(sigma), N(sigma)]))
    assert pair.value == pytest.approx(gen2.value, abs=1e-8)
    trip = energy_triple("D", "N", "D", sigma=sigma)
    gen3 = energy_general(Stack.equally_spaced([D(sigma), N(sigma), D(sigma)]))
    assert trip.method == POLYLOG_N3
    assert trip.value == pytest.approx(gen3.value, abs=1e-8)


@pytest.mark.parametrize("word, method", [
    ("NNN", POLYLOG_N3), ("NDN", POLYLOG_N3), ("DDN", QUADRATURE), ("NDD", QUADRATURE),
    ("DNN", QUADRATURE),
])
def test_triple_other_words(word, method):
    # mixed-sign outer reflections give complex roots near t = 1 and force the fallback
    sg = 3.0
    trip = energy_triple(*word, sigma=sg)
    assert trip.method == method
    plates = [D(sg) if c == "D" else N(sg) for c in word]
    gen = energy_general(Stack.equally_spaced(plates))
    assert trip.value == pytest.approx(gen.value, abs=1e-8)


def test_triple_ideal_limit():
    assert energy_triple(DI, NI, DI).value == pytest.approx(1.75, abs=1e-12)
    assert energy_triple("D", "N", "D", sigma=1e4).value == pytest.approx(1.75, abs=4e-3)


def test_triple_roots_factorize():
    rng = np.random.default_rng(0)
    ri, rj, rk = rng.uniform(-1, 1, (3, 50))
    tj = rng.uniform(0, 1, 50)
    z1, z2, real = triple_roots(ri, rj, rk, tj)
    a = -rj * (ri + rk)
    b = ri * rk * (rj**2 - tj**2)
    ok = real
    np.testing.assert_allclose((z1 + z2)[ok], -a[ok], atol=1e-14)
    np.testing.assert_allclose((z1 * z2)[ok], b[ok], atol=1e-14)


def test_triple_roots_complex_case():
    _, _, real = triple_roots(np.array(0.9), np.array(0.0), np.array(-0.9), np.array(1.0))
    assert not bool(real)


# ---------------------------------------------------------------- general stacks


def test_general_transparent_is_zero():
    res = energy_general(Stack.equally_spaced([D(0.0)] * 4))
    assert res.value == 0.0 and res.method == QUADRATURE


@pytest.mark.parametrize("word", ["DN", "DND", "DNDDN", "DNNDNDDN", "NNDN"])
def test_general_reproduces_ideal_words(word):
    plates = [DI if c == "D" else NI for c in word]
    stack = Stack.equally_spaced(plates)
    routed = energy_general(stack)
    assert routed.method == IDEAL and routed.exact == energy_ideal(word).exact
    quad = energy_general(stack, route_ideal=False)
    assert quad.method == QUADRATURE
    assert quad.value == pytest.approx(float(energy_ideal(word).exact), abs=1e-8)


def test_general_unequal_gaps_and_spacing():
    stack = Stack((DI, DI), (0.0, 2.0))
    # at spacing 1 the pair at distance 2 is 1/8 of the unit energy
    assert energy_general(stack, spacing=1.0, route_ideal=False).value == pytest.approx(
        -1 / 8, abs=1e-9)
    assert energy_general(stack).value == -1.0


def test_general_mixed_ideal_and_finite():
    stack = Stack.equally_spaced([DI, N(5.0), DI])
    res = energy_general(stack)
    assert res.method == QUADRATURE and res.abs_error < 1e-9
    assert res.value > 0.0


def test_general_plate_limit():
    big = Stack.equally_spaced([D(1.0)] * 25)
    with pytest.raises(ConfigError):
        energy_general(big)
    with pytest.raises(ConfigError):
        energy_general(Stack((D(1.0),), (0.0,)))


def test_general_with_kappa_dependent_plates():
    # constant couplings: two general plates are checked against a direct 2D integral
    le = 0.7

    def f(k, z):
        kap = math.hypot(k, z)
        r_tm = le * kap / (le * kap + 2)
        r_te = -le * z * z / (le * z * z + 2 * kap)
        e = math.exp(-2 * kap)
        return k * (math.log1p(-r_tm * r_tm * e) + math.log1p(-r_te * r_te * e))

    v, _ = sp_integrate.dblquad(f, 0, 40, 0, 40, epsabs=1e-13, epsrel=1e-12)
    want = v / (4 * math.pi**2) / DD_ENERGY_SCALE
    got = energy_general(Stack.equally_spaced([Plate.general(le, 0.0)] * 2))
    assert got.value == pytest.approx(want, abs=1e-8)


def test_general_reports_nonpositive_determinant(monkeypatch):
    import qpcasimir.energy as en

    monkeypatch.setattr(en, "delta_total_arrays", lambda r, t2, q: np.zeros(r.shape[1:]) - 1)
    with pytest.raises(NumericalError, match="t="):
        energy_general(Stack.equally_spaced([D(1.0), N(1.0)]))


# ---------------------------------------------------------------- words, sweeps, fits


def test_energy_word_dispatch():
    fib = preset("fibonacci")
    assert energy_word(iterate(fib, 0), "finite", 1.0).value == 0.0
    assert energy_word(iterate(fib, 1), "finite", 1.0).method == POLYLOG_N2
    assert energy_word(iterate(fib, 2), "finite", 1.0).method == POLYLOG_N3
    assert energy_word(iterate(fib, 3), "finite", 1.0).method == QUADRATURE
    assert energy_word(iterate(fib, 3), "ideal").method == IDEAL


def test_sigma_grid_default():
    g = sigma_grid()
    assert len(g) == 60 and g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(1e4)
    assert np.all(np.diff(np.log(g)) == pytest.approx(np.log(1e6) / 59))
    with pytest.raises(ConfigError):
        sigma_grid(0.0, 1.0, 3)


def test_sweep_rows_sorted():
    rows = sweep(preset("thue-morse"), [2, 1], sigmas=[10.0, 0.5])
    assert [(i, s) for i, s, _ in rows] == [(1, 0.5), (1, 10.0), (2, 0.5), (2, 10.0)]


@pytest.mark.parametrize("I", [2, 3, 4])
def test_fibonacci_single_zero_crossing(I):
    word = iterate(preset("fibonacci"), I)
    grid = np.logspace(np.log10(0.05), 2, 25)
    vals = np.array([energy_word(word, "finite", s).value for s in grid])
    assert vals[0] < 0 < vals[-1]
    assert np.count_nonzero(np.diff(np.sign(vals))) == 1


def test_fibonacci_first_iterate_always_repulsive():
    word = iterate(preset("fibonacci"), 1)
    assert all(energy_word(word, "finite", s).value > 0 for s in (1e-3, 0.05, 1.0, 100.0))


SIGNS = {"fibonacci": 1, "thue-morse": 1, "period-doubling": 1, "silver-mean": 1,
         "bronze-mean": -1, "copper-mean": -1, "nickel-mean": -1, "triadic-cantor": -1}


@pytest.mark.parametrize("name", sorted(SIGNS))
def test_large_sigma_sign_follows_ideal_word(name):
    system = preset(name)
    for i in range(1, 4):
        word = iterate(system, i)
        if len(word) > 12:
            break
        ideal = energy_ideal(word).value
        finite = energy_word(word, "finite", 1e4).value
        assert math.copysign(1, finite) == math.copysign(1, ideal)
        if name != "triadic-cantor":
            assert math.copysign(1, ideal) == SIGNS[name]


def test_growth_fit_constant_series():
    fit = growth_fit([(i, 2.5) for i in range(5)])
    assert fit.rate == pytest.approx(0.0, abs=1e-12)
    assert fit.prefactor == pytest.approx(2.5)
    assert all(r == pytest.approx(1.0) for _, r in fit.ratios)


def test_growth_fit_exact_exponential():
    fit = growth_fit([(i, -0.3 * math.exp(0.7 * i)) for i in range(3, 9)])
    assert fit.rate == pytest.approx(0.7, abs=1e-12)
    assert fit.prefactor == pytest.approx(-0.3, rel=1e-12)
    assert fit.window == (3, 8) and fit.n_points == 6 and fit.residual < 1e-12


def test_growth_fit_refusals():
    with pytest.raises(FitRefused) as info:
        growth_fit([(1, 1.0), (2, -2.0), (3, 4.0)])
    assert info.value.ratios == ((1, -2.0), (2, -2.0))
    with pytest.raises(ConfigError):
        growth_fit([(1, 1.0), (2, 2.0)])
    with pytest.raises(ConfigError):
        growth_fit([(1, 1.0), (1, 2.0), (2, 3.0)])


def test_fibonacci_and_thue_morse_growth():
    fib = ideal_growth_fit(preset("fibonacci"), 15, 25)
    assert fib.rate == pytest.approx(0.48, abs=0.02)
    assert fib.ratios[-1][1] == pytest.approx(1.618, abs=0.005)
    tm = ideal_growth_fit(preset("thue-morse"), 15, 25)
    assert tm.rate == pytest.approx(math.log(2), abs=0.01)
    assert tm.ratios[-1][1] == pytest.approx(2.0, abs=1e-3)


@given(like=st.integers(0, 10**6), unlike=st.integers(0, 10**6))
def test_ideal_energy_linear_in_counts(like, unlike):
    from qpcasimir.lattice import NeighborhoodStats

    res = energy_ideal(NeighborhoodStats(like, unlike, like + unlike + 1))
    assert res.exact == Fraction(-like) + Fraction(7, 8) * unlike


@given(sigma=st.floats(0.01, 1e3))
def test_pair_symmetric_and_dual(sigma):
    dn = energy_pair("D", "N", sigma=sigma).value
    assert energy_pair("N", "D", sigma=sigma).value == pytest.approx(dn, abs=1e-12)
    # swapping electric and magnetic properties exchanges the modes only
    assert energy_pair("N", "N", sigma=sigma).value == pytest.approx(
        energy_pair("D", "D", sigma=sigma).value, abs=1e-12)
    assert 0.0 <= dn < 0.875
