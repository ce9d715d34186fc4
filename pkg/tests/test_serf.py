import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spiregraph.graphs import SpectralChannel, base_channels, moebius, prism
from spiregraph.serf import (BISECTION_STEPS, channel_roots, hyperbolic_weight, in_band_roots,
                             norm_sum, out_of_band_deficit_bound, out_of_band_roots, secular_g,
                             serf_spectrum)
from spiregraph.signal import aggregate_weights
from spiregraph.tower import TowerParams, direct_spectrum, path_matrix, tridiag_reference

GAMMA = math.sqrt(6) / 2


def chebyshev_norm(theta: float, L: int) -> float:
    """Oracle: sum of U_l(cos theta)^2 via the three-term recurrence."""
    x = math.cos(theta)
    u_prev, u, total = 1.0, 2 * x, 1.0
    for _ in range(L):
        total += u * u
        u_prev, u = u, 2 * x * u - u_prev
    return total


def test_bisection_step_count():
    assert BISECTION_STEPS == 53


def test_secular_g_values():
    # (L+2) pi / 2 is an odd multiple of pi/2 only for odd L
    p = TowerParams(L=5, d=3)
    assert abs(secular_g(np.pi / 2, 0.0, p)) == pytest.approx(GAMMA)
    assert abs(secular_g(np.pi / 2, 0.0, TowerParams(L=4, d=3))) < 1e-14
    for k in range(1, p.L + 2):
        assert abs(secular_g(k * np.pi / (p.L + 2), 0.0, p)) < 1e-14


def test_sign_change_in_each_bracket():
    p = TowerParams(L=13, d=3)
    edges = np.arange(p.L + 2) * np.pi / (p.L + 1)
    g = secular_g(np.clip(edges, 1e-15, np.pi - 1e-15), 1.0, p)
    assert np.all(np.sign(g[:-1]) != np.sign(g[1:]))
    ref = tridiag_reference(1.0, p)
    np.testing.assert_allclose(np.sort(2 * p.gamma * np.cos(in_band_roots(1.0, p).thetas)), ref,
                               atol=1e-10)


@pytest.mark.parametrize("L", [1, 2, 7, 30])
def test_mu_zero_roots(L):
    p = TowerParams(L=L, d=3)
    th = in_band_roots(0.0, p).thetas
    np.testing.assert_allclose(th, np.arange(1, L + 2) * np.pi / (L + 2), atol=1e-14)


def test_mu_two_matches_reference():
    p = TowerParams(L=13, d=3)
    roots = in_band_roots(2.0, p)
    ref = tridiag_reference(2.0, p)
    inband = ref[np.abs(ref) <= 2 * p.gamma]
    np.testing.assert_allclose(np.sort(2 * p.gamma * np.cos(roots.thetas)), inband, atol=1e-10)


def test_mu_three_escapes_once():
    p = TowerParams(L=13, d=3)
    assert len(in_band_roots(3.0, p).thetas) == p.L


def test_roots_inside_brackets():
    p = TowerParams(L=21, d=3)
    for mu in (-3.0, -1.2, 0.3, 2.9):
        th = in_band_roots(mu, p).thetas
        k = np.floor(th * (p.L + 1) / np.pi)
        assert np.all((th > k * np.pi / (p.L + 1)) & (th < (k + 1) * np.pi / (p.L + 1)))
        assert len(np.unique(k)) == len(k)


def test_out_of_band_positive():
    p = TowerParams(L=15, d=3)
    (lam,) = out_of_band_roots(3.0, p)
    assert abs(lam - tridiag_reference(3.0, p)[-1]) < 1e-9


def test_out_of_band_none():
    assert out_of_band_roots(0.0, TowerParams(L=15, d=3)) == []
    assert out_of_band_roots(1.0, TowerParams(L=15, d=3)) == []


def test_out_of_band_negative_near_minus_three_and_half():
    p = TowerParams(L=13, d=3)
    (lam,) = out_of_band_roots(-3.0, p)
    assert abs(lam + 3.5) < 1e-6
    assert abs(lam - tridiag_reference(-3.0, p)[0]) < 1e-9


def test_norm_sum_small_cases():
    assert norm_sum(np.pi / 2, 2) == pytest.approx(2.0, abs=1e-14)
    assert norm_sum(np.pi / 3, 1) == pytest.approx(2.0, abs=1e-14)


@given(st.floats(0.01, math.pi - 0.01), st.integers(1, 60))
def test_norm_sum_matches_recurrence(theta, L):
    assert norm_sum(theta, L) == pytest.approx(chebyshev_norm(theta, L), rel=1e-12)


def test_norm_sum_random_L13():
    rng = np.random.default_rng(5)
    for theta in rng.uniform(0.05, math.pi - 0.05, 50):
        assert norm_sum(theta, 13) == pytest.approx(chebyshev_norm(theta, 13), rel=1e-12)


def test_hyperbolic_weight_matches_eigenvector():
    p = TowerParams(L=15, d=3)
    (lam,) = out_of_band_roots(3.0, p)
    w, v = np.linalg.eigh(path_matrix(3.0, p))
    assert hyperbolic_weight(1.0, lam, p) == pytest.approx(v[0, -1] ** 2, rel=1e-8)
    # very long towers underflow instead of overflowing
    big = TowerParams(L=5000, d=3)
    (lam_big,) = out_of_band_roots(3.0, big)
    assert 0.0 <= hyperbolic_weight(1.0, lam_big, big) < 1e-300


def test_random_draws_against_tridiagonal():
    """200 draws of (mu, L): secular roots plus the escaped one equal the dense spectrum."""
    rng = np.random.default_rng(20240611)
    for _ in range(200):
        mu = float(rng.uniform(-3, 3))
        L = int(rng.integers(3, 41))
        p = TowerParams(L=L, d=3)
        (roots,) = channel_roots([SpectralChannel(mu, 1, 1.0)], p, True)
        lam = np.sort(roots.eigenvalues(p.gamma))
        ref = tridiag_reference(mu, p)
        assert len(lam) == L + 1
        np.testing.assert_allclose(lam, ref, atol=1e-9, rtol=0)
        assert np.min(np.diff(lam)) > 1e-9


def _merged(spec):
    return aggregate_weights(spec.lambdas, spec.weights, 1e-9)


@pytest.mark.parametrize("m", [4, 8])
@pytest.mark.parametrize("family", [prism, moebius])
def test_serf_matches_direct(m, family):
    g = family(m)
    p = TowerParams.for_graph(g)
    la, wa = _merged(direct_spectrum(g, p))
    lb, wb = _merged(serf_spectrum(g, p, include_out_of_band=True))
    assert len(la) == len(lb)
    np.testing.assert_allclose(la, lb, atol=1e-8, rtol=0)
    np.testing.assert_allclose(wa, wb, atol=1e-8, rtol=0)


@pytest.mark.parametrize("m", [3, 4, 5, 7, 8, 16, 33])
@pytest.mark.parametrize("family", [prism, moebius])
def test_in_band_deficit_within_bound(m, family):
    g = family(m)
    p = TowerParams.for_graph(g)
    spec = serf_spectrum(g, p)
    deficit = 1 - spec.total_weight
    bound = out_of_band_deficit_bound(base_channels(g), p)
    assert -1e-12 <= deficit <= bound + 1e-12
    assert abs(serf_spectrum(g, p, include_out_of_band=True).total_weight - 1) < 1e-9


def test_serf_spectrum_layout():
    g = moebius(7)
    p = TowerParams.for_graph(g)
    spec = serf_spectrum(g, p)
    mus = spec.channel_mu()
    assert np.any(np.isclose(mus, -3.0))
    assert np.all(np.abs(spec.lambdas) <= 2 * p.gamma)
    full = serf_spectrum(g, p, include_out_of_band=True)
    assert np.min(full.lambdas) == pytest.approx(-3.5, abs=1e-6)
    # channel-major, ascending mu
    assert np.all(np.diff(spec.channel) >= 0)


@pytest.mark.parametrize("L", [3, 8, 22, 40])
def test_edge_bracket_escape_threshold(L):
    """Just past |mu| = gamma (L+2)/(L+1) the edge root leaves the band, on either side."""
    p = TowerParams(L=L, d=3)
    thr = p.gamma * (L + 2) / (L + 1)
    for mu in (thr * (1 + 1e-6), -thr * (1 + 1e-6), thr * 1.3, -thr * 1.3):
        (roots,) = channel_roots([SpectralChannel(mu, 1, 1.0)], p, True)
        assert len(roots.thetas) == L and len(roots.out_of_band) == 1
        np.testing.assert_allclose(np.sort(roots.eigenvalues(p.gamma)), tridiag_reference(mu, p),
                                   atol=1e-9)
    for mu in (thr * (1 - 1e-3), -thr * (1 - 1e-3)):
        assert len(in_band_roots(mu, p).thetas) == L + 1
        assert out_of_band_roots(mu, p) == []
