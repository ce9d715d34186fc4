"""Secular-equation root finding (SERF) for the towered-graph spectrum.

Each base eigenvalue mu contributes the spectrum of an (L+1)-point path
Hamiltonian whose eigenvalues solve ``gamma U_{L+1}(x) = mu U_L(x)`` with
``x = lambda / (2 gamma)``.  In-band roots are found in theta-space
(``x = cos theta``) where the equation reads
``gamma sin((L+2) theta) = mu sin((L+1) theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalContractError
from .graphs import BaseGraph, SpectralChannel, base_channels
from .tower import SERF, TowerParams, TowerSpectrum

BISECTION_STEPS = 53
ENDPOINT_OFFSET = 1e-15
KAPPA_SPAN = 5.0


@dataclass
class ChannelRoots:
    """Roots of one channel: in-band thetas (ascending) and out-of-band eigenvalues."""

    mu: float
    thetas: np.ndarray
    out_of_band: list[float] = field(default_factory=list)

    def eigenvalues(self, gamma: float) -> np.ndarray:
        return np.concatenate([2 * gamma * np.cos(self.thetas), self.out_of_band])


def secular_g(theta, mu, p: TowerParams):
    """``gamma sin((L+2) theta) - mu sin((L+1) theta)``; broadcasts over arrays."""
    return p.gamma * np.sin((p.L + 2) * theta) - mu * np.sin((p.L + 1) * theta)


def _residual_tol(mu, p: TowerParams):
    return 1e-10 * (p.gamma + np.abs(mu)) * (p.L + 2)


def _bisect_brackets(mus: np.ndarray, p: TowerParams) -> np.ndarray:
    """Vectorized bisection over every (channel, bracket) pair.

    Returns an array of shape (len(mus), L+1) of thetas; NaN marks brackets
    without a sign change.
    """
    mus = np.asarray(mus, dtype=float)[:, None]
    k = np.arange(p.L + 1)
    step = np.pi / (p.L + 1)
    lo = np.broadcast_to(k * step + ENDPOINT_OFFSET, (mus.shape[0], p.L + 1)).copy()
    hi = np.broadcast_to((k + 1) * step - ENDPOINT_OFFSET, lo.shape).copy()
    g_lo = secular_g(lo, mus, p)
    g_hi = secular_g(hi, mus, p)
    # At theta -> 0 and theta -> pi, G vanishes and its sampled sign is rounding
    # noise; use the analytic limits G ~ eps (gamma(L+2) -+ mu(L+1)) instead.
    g_lo[:, 0] = p.gamma * (p.L + 2) - mus[:, 0] * (p.L + 1)
    g_hi[:, -1] = (-1) ** (p.L + 1) * (p.gamma * (p.L + 2) + mus[:, 0] * (p.L + 1))
    active = np.signbit(g_lo) != np.signbit(g_hi)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        g_mid = secular_g(mid, mus, p)
        same = np.signbit(g_mid) == np.signbit(g_lo)
        lo = np.where(same, mid, lo)
        g_lo = np.where(same, g_mid, g_lo)
        hi = np.where(same, hi, mid)
    theta = np.where(active, 0.5 * (lo + hi), np.nan)
    resid = np.abs(secular_g(theta, mus, p))
    bad = active & ~(resid <= _residual_tol(mus, p))
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise NumericalContractError(
            f"secular residual {resid[i, j]:.3e} at mu={mus[i, 0]:.6g}, bracket {j}"
        )
    found = active.sum(axis=1)
    if np.any(found < p.L):
        i = int(np.argmin(found))
        raise NumericalContractError(
            f"only {found[i]} of {p.L + 1} in-band roots for mu={mus[i, 0]:.6g}; "
            "more than one eigenvalue escaped the band"
        )
    return theta


def in_band_roots(mu: float, p: TowerParams) -> ChannelRoots:
    """In-band roots by 53-step bisection in each interlacing bracket."""
    theta = _bisect_brackets(np.array([mu]), p)[0]
    return ChannelRoots(mu=float(mu), thetas=theta[~np.isnan(theta)])


def _sinh_ratio(kappa: float, L: int) -> float:
    # sinh((L+2)k) / sinh((L+1)k) without overflow
    return math.exp(kappa) * math.expm1(-2 * (L + 2) * kappa) / math.expm1(-2 * (L + 1) * kappa)


def out_of_band_roots(mu: float, p: TowerParams) -> list[float]:
    """The (at most one) eigenvalue beyond ``+-2 gamma``, on the side of sign(mu).

    Solves ``gamma sinh((L+2) k) = |mu| sinh((L+1) k)`` for ``k > 0`` by
    53-step bisection and returns ``sign(mu) * 2 gamma cosh(k)``.
    """
    a = abs(mu)
    if a <= p.gamma:
        return []
    lo = ENDPOINT_OFFSET
    hi = math.acosh(max(a / (2 * p.gamma), 1.0)) + KAPPA_SPAN

    def g(k: float) -> float:
        return p.gamma * _sinh_ratio(k, p.L) - a

    g_lo = g(lo)
    if (g_lo < 0) == (g(hi) < 0):
        return []
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    kappa = 0.5 * (lo + hi)
    if abs(g(kappa)) > _residual_tol(mu, p):
        raise NumericalContractError(f"hyperbolic secular residual too large at mu={mu:.6g}")
    return [math.copysign(2 * p.gamma * math.cosh(kappa), mu)]


def norm_sum(theta, L: int):
    """Closed form of ``sum_{l=0}^{L} U_l(cos theta)^2``."""
    s = np.sin(theta)
    return ((2 * L + 3) * s - np.sin((2 * L + 3) * theta)) / (4 * s**3)


def hyperbolic_weight(p_mass: float, lam: float, p: TowerParams) -> float:
    """``p / sum_l U_l(x)^2`` for an out-of-band ``x = lam / (2 gamma)``, by recurrence.

    The recurrence is rescaled as it grows so the result underflows to zero
    instead of overflowing.
    """
    x = abs(lam) / (2 * p.gamma)
    u_prev, u = 1.0, 2 * x
    total = 1.0 + u * u
    log_scale = 0.0
    for _ in range(2, p.L + 1):
        u_prev, u = u, 2 * x * u - u_prev
        total += u * u
        if u > 1e100:
            u_prev, u, total = u_prev * 1e-100, u * 1e-100, total * 1e-200
            log_scale += 200 * math.log(10)
    return math.exp(math.log(p_mass) - math.log(total) - log_scale) if p_mass > 0 else 0.0


def channel_roots(channels: list[SpectralChannel], p: TowerParams,
                  include_out_of_band: bool = False) -> list[ChannelRoots]:
    thetas = _bisect_brackets(np.array([ch.mu for ch in channels]), p)
    roots = []
    for ch, row in zip(channels, thetas):
        oob = out_of_band_roots(ch.mu, p) if include_out_of_band else []
        roots.append(ChannelRoots(mu=ch.mu, thetas=row[~np.isnan(row)], out_of_band=oob))
    return roots


def serf_spectrum(g: BaseGraph, p: TowerParams, include_out_of_band: bool = False,
                  channels: list[SpectralChannel] | None = None) -> TowerSpectrum:
    """Towered spectrum from secular roots and closed-form top weights.

    Entries are ordered channel-major (ascending mu); within a channel the
    positive out-of-band root comes first, then in-band roots by ascending
    theta, then a negative out-of-band root.
    """
    if channels is None:
        channels = base_channels(g)
    lams, weights, idx = [], [], []
    for i, (ch, roots) in enumerate(zip(channels, channel_roots(channels, p, include_out_of_band))):
        up = [lam for lam in roots.out_of_band if lam > 0]
        down = [lam for lam in roots.out_of_band if lam < 0]
        ch_lams = np.concatenate([up, 2 * p.gamma * np.cos(roots.thetas), down])
        ch_w = np.concatenate([
            [hyperbolic_weight(ch.p, lam, p) for lam in up],
            ch.p / norm_sum(roots.thetas, p.L),
            [hyperbolic_weight(ch.p, lam, p) for lam in down],
        ])
        lams.append(ch_lams)
        weights.append(ch_w)
        idx.append(np.full(len(ch_lams), i, dtype=int))
    return TowerSpectrum(
        lambdas=np.concatenate(lams),
        weights=np.concatenate(weights),
        channel=np.concatenate(idx),
        params=p,
        source=SERF,
        channels=tuple(channels),
    )


def out_of_band_deficit_bound(channels: list[SpectralChannel], p: TowerParams) -> float:
    """Upper bound on the weight missing from an in-band-only spectrum.

    Every channel with an escaped eigenvalue ``2 gamma cosh(kappa)`` loses at most
    ``p_i sinh(kappa)^2 / sinh((L+1) kappa)^2`` (the top-to-bottom ratio of its
    unnormalized mode), which decays like ``exp(-2 kappa L)``.
    """
    total = 0.0
    for ch in channels:
        for lam in out_of_band_roots(ch.mu, p):
            kappa = math.acosh(abs(lam) / (2 * p.gamma))
            ratio = math.sinh(kappa) / math.sinh((p.L + 1) * kappa) if (p.L + 1) * kappa < 700 else 0.0
            total += ch.p * ratio**2
    return total
