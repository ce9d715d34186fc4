"""Return amplitudes ``f(t) = sum_k W_k exp(-i lambda_k t)`` and Parseval sums."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike
from typing import TextIO

import numpy as np

from .graphs import group_values
from .tower import TowerSpectrum

MAX_EIG_BLOCK = 30_000_000
MAX_TIME_BLOCK = 4_000_000
EIG_BLOCK = 8192
TIME_BLOCK = 512
SNAP_TOL = 1e-9


@dataclass
class ComplexSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same length")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def write_csv(self, out: TextIO | str | PathLike) -> None:
        if not hasattr(out, "write"):
            with open(out, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "re", "im", "abs"])
        for t, v in zip(self.times, self.values):
            writer.writerow([f"{t:.9g}", f"{v.real:.9g}", f"{v.imag:.9g}", f"{abs(v):.9g}"])


def exp_sum(lambdas: np.ndarray, weights: np.ndarray, times: np.ndarray,
            eig_block: int = EIG_BLOCK, time_block: int = TIME_BLOCK) -> np.ndarray:
    """Direct chunked evaluation of ``sum_k w_k exp(-i lambda_k t)`` on ``times``.

    Eigenvalue-block partial sums are accumulated in block order, so each output
    point sees the same summation order whatever the time blocking.
    """
    if not 0 < eig_block <= MAX_EIG_BLOCK or not 0 < time_block <= MAX_TIME_BLOCK:
        raise ValueError("block sizes out of range")
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    times = np.asarray(times, dtype=float)
    out = np.zeros(times.shape, dtype=complex)
    for t0 in range(0, len(times), time_block):
        tb = times[t0:t0 + time_block]
        acc = np.zeros(len(tb), dtype=complex)
        for e0 in range(0, len(lambdas), eig_block):
            phase = np.multiply.outer(tb, lambdas[e0:e0 + eig_block])
            acc += np.exp(-1j * phase) @ weights[e0:e0 + eig_block]
        out[t0:t0 + time_block] = acc
    return out


def return_amplitude(spec: TowerSpectrum, times, eig_block: int = EIG_BLOCK,
                     time_block: int = TIME_BLOCK) -> ComplexSeries:
    if len(spec) == 0:
        raise ValueError("empty spectrum")
    times = np.asarray(times, dtype=float)
    return ComplexSeries(times, exp_sum(spec.lambdas, spec.weights, times, eig_block, time_block))


def _check_compatible(a: TowerSpectrum, b: TowerSpectrum) -> None:
    if a.params.L != b.params.L or not np.isclose(a.params.gamma, b.params.gamma, rtol=0, atol=1e-15):
        raise ValueError("spectra must share L and gamma")


def difference_signal(spec_a: TowerSpectrum, spec_b: TowerSpectrum, times, **blocks) -> ComplexSeries:
    """``f_A(t) - f_B(t)`` on a common grid."""
    _check_compatible(spec_a, spec_b)
    fa = return_amplitude(spec_a, times, **blocks)
    fb = return_amplitude(spec_b, times, **blocks)
    if not np.array_equal(fa.times, fb.times):
        raise ValueError("grid mismatch")
    return ComplexSeries(fa.times, fa.values - fb.values)


def aggregate_weights(lambdas, weights, tol: float = SNAP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Merge eigenvalues chained within ``tol``; returns ascending (lambda, summed weight)."""
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    groups = group_values(lambdas, tol)
    lam = np.array([lambdas[g[0]] for g in groups])
    w = np.array([weights[g].sum() for g in groups])
    return lam, w


def weight_differences(spec_a: TowerSpectrum, spec_b: TowerSpectrum,
                       tol: float = SNAP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Per-eigenvalue coefficients ``c = W_A - W_B`` of the difference signal."""
    la, wa = aggregate_weights(spec_a.lambdas, spec_a.weights, tol)
    lb, wb = aggregate_weights(spec_b.lambdas, spec_b.weights, tol)
    lam, coef = [], []
    i = j = 0
    while i < len(la) or j < len(lb):
        if j == len(lb) or (i < len(la) and la[i] < lb[j] - tol):
            lam.append(la[i]); coef.append(wa[i]); i += 1
        elif i == len(la) or lb[j] < la[i] - tol:
            lam.append(lb[j]); coef.append(-wb[j]); j += 1
        else:
            lam.append(la[i]); coef.append(wa[i] - wb[j]); i += 1; j += 1
    return np.array(lam), np.array(coef)


def parseval(spec_a: TowerSpectrum, spec_b: TowerSpectrum, tol: float = SNAP_TOL) -> float:
    """Long-time average of ``|f_A - f_B|^2``, i.e. ``sum_lambda |c_lambda|^2``."""
    _check_compatible(spec_a, spec_b)
    _, coef = weight_differences(spec_a, spec_b, tol)
    return float(np.sum(coef**2))
