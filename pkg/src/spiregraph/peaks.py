"""Peak distinguishability on the quadratic horizon and the measurement budget."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import BaseGraph
from .serf import serf_spectrum
from .signal import ComplexSeries, difference_signal, exp_sum, parseval
from .tower import DIRECT, SERF, TowerParams, TowerSpectrum, direct_spectrum

DT_COARSE = 0.5
DT_FINE = 0.01
WINDOWS = (10.0, 5.0)
TOP_K = 5
DELTA = 0.05
R_CANDIDATES = 2
# Table-precision quantile (z = 1.645 at delta = 0.05), the convention behind
# the published budgets; None uses the full-precision quantile.
Z_DECIMALS: int | None = 3


# Acklam's rational approximation, followed by one Halley step on erfc.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549671010466010e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _tail(q: float) -> float:
    num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
    den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
    return num / den


def inv_norm_cdf(prob: float) -> float:
    """Standard-normal quantile."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {prob}")
    if prob < _P_LOW:
        x = _tail(math.sqrt(-2.0 * math.log(prob)))
    elif prob > 1.0 - _P_LOW:
        x = -_tail(math.sqrt(-2.0 * math.log1p(-prob)))
    else:
        q = prob - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x = num / den
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - prob
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def budget_z(delta: float = DELTA, r: int = R_CANDIDATES, z_decimals: int | None = Z_DECIMALS) -> float:
    if r < 2:
        raise ValueError("need at least two candidates")
    z = inv_norm_cdf(1.0 - delta / (r - 1))
    return round(z, z_decimals) if z_decimals is not None else z


def measurement_budget(dis: float, delta: float = DELTA, r: int = R_CANDIDATES,
                       z_decimals: int | None = Z_DECIMALS) -> int:
    """Hadamard shots per branch, ``ceil(2 z^2 / dis^2)``."""
    if not dis > 0:
        raise ValueError("distinguishability is zero: the measurement budget is unbounded")
    z = budget_z(delta, r, z_decimals)
    return max(1, math.ceil(2.0 * z * z / (dis * dis)))


def coarse_scan(series: ComplexSeries, top_k: int = TOP_K) -> list[float]:
    """Times of the ``top_k`` strict local maxima of ``|values|``, highest first.

    End points count as maxima when they exceed their single neighbour; ties
    in value go to the earlier time.
    """
    y = series.abs
    if len(y) == 0:
        return []
    if len(y) == 1:
        return [float(series.times[0])] if y[0] > 0 else []
    left = np.concatenate([[True], y[1:] > y[:-1]])
    right = np.concatenate([y[:-1] > y[1:], [True]])
    idx = np.flatnonzero(left & right)
    idx = sorted(idx, key=lambda i: (-y[i], i))[:top_k]
    return [float(series.times[i]) for i in idx]


def _abs_diff(specs, times: np.ndarray) -> np.ndarray:
    a, b = specs
    return np.abs(exp_sum(a.lambdas, a.weights, times) - exp_sum(b.lambdas, b.weights, times))


def refine_peak(specs: tuple[TowerSpectrum, TowerSpectrum], t0: float, horizon: float = math.inf,
                dt: float = DT_FINE, windows=WINDOWS) -> tuple[float, float]:
    """Fine-grid maximum of ``|f_A - f_B|`` near ``t0``, re-centred once per window."""
    best_t, best = t0, -1.0
    for w in windows:
        k = int(round(w / dt))
        grid = best_t + dt * np.arange(-k, k + 1)
        grid = grid[(grid >= 0) & (grid <= horizon)]
        vals = _abs_diff(specs, grid)
        j = int(np.argmax(vals))
        best_t, best = float(grid[j]), float(vals[j])
    return best_t, best


@dataclass
class PeakResult:
    t_star: float
    dis: float
    parseval: float
    n_rep: int | None
    m: float
    horizon: float
    n: int
    L: int
    gamma: float
    delta: float = DELTA
    r: int = R_CANDIDATES
    spectra_source: str = SERF
    f_a: complex = 0j
    f_b: complex = 0j
    config: dict = field(default_factory=dict)

    @property
    def budget_unbounded(self) -> bool:
        return self.n_rep is None

    def to_dict(self) -> dict:
        par = self.parseval
        out = {
            "m": self.m if self.m != int(self.m) else int(self.m),
            "n": self.n,
            "L": self.L,
            "gamma": self.gamma,
            "t_star": self.t_star,
            "dis": self.dis,
            "parseval": par,
            "n2_parseval": self.n**2 * par,
            "dis2_over_parseval": self.dis**2 / par if par > 0 else None,
            "n_rep": self.n_rep,
            "delta": self.delta,
            "r": self.r,
            "horizon": self.horizon,
            "spectra_source": self.spectra_source,
            "seedless": True,
        }
        out.update(self.config)
        return out

    def to_json(self) -> str:
        return json.dumps(_sig9(self.to_dict()))


def _sig9(obj):
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _sig9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig9(v) for v in obj]
    return obj


def spectrum_for(g: BaseGraph, p: TowerParams, method: str = SERF,
                 include_out_of_band: bool = False) -> TowerSpectrum:
    if method == SERF:
        return serf_spectrum(g, p, include_out_of_band)
    if method == DIRECT:
        return direct_spectrum(g, p)
    raise ValueError(f"unknown method {method!r}")


def coarse_grid(horizon: float, dt: float = DT_COARSE) -> np.ndarray:
    return dt * np.arange(int(math.floor(horizon / dt + 1e-9)) + 1)


def peak_from_spectra(spec_a: TowerSpectrum, spec_b: TowerSpectrum, horizon: float,
                      dt_coarse: float = DT_COARSE, dt_fine: float = DT_FINE,
                      windows=WINDOWS, top_k: int = TOP_K, workers: int = 1) -> tuple[float, float]:
    """Two-stage search for ``max_t |f_A - f_B|`` on ``[0, horizon]``; returns (t*, Dis)."""
    series = difference_signal(spec_a, spec_b, coarse_grid(horizon, dt_coarse))
    candidates = coarse_scan(series, top_k)
    if not candidates:
        return 0.0, float(series.abs.max(initial=0.0))

    def refine(t0: float) -> tuple[float, float]:
        return refine_peak((spec_a, spec_b), t0, horizon, dt_fine, windows)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            refined = list(pool.map(refine, candidates))
    else:
        refined = [refine(t0) for t0 in candidates]
    t_star, dis = max(refined, key=lambda tv: (tv[1], -tv[0]))
    return t_star, dis


def distinguishability(ga: BaseGraph, gb: BaseGraph, p: TowerParams, method: str = SERF,
                       include_out_of_band: bool = False, horizon_mult: float = 1.0,
                       dt_coarse: float = DT_COARSE, dt_fine: float = DT_FINE,
                       windows=WINDOWS, top_k: int = TOP_K, delta: float = DELTA,
                       r: int = R_CANDIDATES, z_decimals: int | None = Z_DECIMALS,
                       workers: int = 1) -> PeakResult:
    """Full pipeline: spectra, coarse scan on [0, horizon_mult * m^2], refinement, budget."""
    if ga.n != gb.n or ga.d != gb.d:
        raise ValueError("candidate graphs must share n and d")
    spec_a = spectrum_for(ga, p, method, include_out_of_band)
    spec_b = spectrum_for(gb, p, method, include_out_of_band)
    m = ga.half_size
    horizon = horizon_mult * m * m
    t_star, dis = peak_from_spectra(spec_a, spec_b, horizon, dt_coarse, dt_fine, windows,
                                    top_k, workers)
    try:
        n_rep = measurement_budget(dis, delta, r, z_decimals)
    except ValueError:
        n_rep = None
    f_a, f_b = (complex(exp_sum(s.lambdas, s.weights, np.array([t_star]))[0]) for s in (spec_a, spec_b))
    return PeakResult(
        t_star=t_star, dis=dis, parseval=parseval(spec_a, spec_b), n_rep=n_rep,
        m=m, horizon=horizon, n=ga.n, L=p.L, gamma=p.gamma, delta=delta, r=r,
        spectra_source=method, f_a=f_a, f_b=f_b,
        config={
            "c": p.c, "d": p.d, "graph_a": ga.family, "graph_b": gb.family,
            "include_out_of_band": include_out_of_band, "horizon_mult": horizon_mult,
            "dt_coarse": dt_coarse, "dt_fine": dt_fine, "top_k": top_k,
            "z": budget_z(delta, r, z_decimals),
        },
    )
