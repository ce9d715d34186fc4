"""The towered graph: Hamiltonian, direct diagonalization and path-Hamiltonian reference.

Rows of the towered matrix are indexed ``(v, l) -> v*(L+1) + l`` with l=0 the
top of the tower and l=L the bottom, where base-graph edges attach.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import TextIO

import numpy as np

from .errors import CapacityError
from .graphs import BaseGraph, SpectralChannel
from .linalg import symmetric_eigh

DENSE_CAP = 20_000

DIRECT = "direct"
SERF = "serf"


@dataclass(frozen=True)
class TowerParams:
    """Tower length ``L``, base degree ``d`` and thickening ``c``.

    ``gamma`` defaults to sqrt(d/c), the weight that makes the towered graph the
    exact level-set quotient of the spired graph; pass it explicitly to override.
    """

    L: int
    d: int
    c: int = 2
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"tower length L must be >= 1, got {self.L}")
        if self.c < 1 or self.d < 1:
            raise ValueError("c and d must be positive")
        if self.gamma is None:
            object.__setattr__(self, "gamma", math.sqrt(self.d / self.c))
        elif not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def D(self) -> int:
        return self.c * self.d

    @classmethod
    def for_graph(cls, g: BaseGraph, L: int | None = None, c: int = 2,
                  gamma: float | None = None) -> "TowerParams":
        return cls(L=g.n - 1 if L is None else L, d=g.d, c=c, gamma=gamma)


@dataclass
class TowerSpectrum:
    """Eigenvalue / top-weight pairs of a towered graph.

    ``channel[k]`` indexes ``channels`` (SERF) or is -1 (direct method).
    """

    lambdas: np.ndarray
    weights: np.ndarray
    channel: np.ndarray
    params: TowerParams
    source: str
    channels: tuple[SpectralChannel, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.lambdas)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def channel_mu(self) -> np.ndarray:
        mus = np.array([ch.mu for ch in self.channels] + [np.nan])
        return mus[np.where(self.channel >= 0, self.channel, len(self.channels))]

    def write_csv(self, out: TextIO | str | PathLike) -> None:
        """Columns ``lambda, weight, channel_mu`` (blank mu for direct spectra)."""
        if not hasattr(out, "write"):
            with open(out, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["lambda", "weight", "channel_mu"])
        for lam, w, mu in zip(self.lambdas, self.weights, self.channel_mu()):
            writer.writerow([f"{lam:.9g}", f"{w:.9g}", "" if np.isnan(mu) else f"{mu:.9g}"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def read_spectrum_csv(src: TextIO | str | PathLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a spectrum CSV into (lambdas, weights, channel_mu) arrays."""
    if not hasattr(src, "read"):
        with open(src, newline="") as fh:
            return read_spectrum_csv(fh)
    rows = list(csv.DictReader(src))
    lam = np.array([float(r["lambda"]) for r in rows])
    w = np.array([float(r["weight"]) for r in rows])
    mu = np.array([float(r["channel_mu"]) if r["channel_mu"] else np.nan for r in rows])
    return lam, w, mu


def path_matrix(mu: float, p: TowerParams) -> np.ndarray:
    """(L+1)x(L+1) path Hamiltonian: off-diagonal gamma, ``mu`` on the bottom diagonal."""
    h = np.diag(np.full(p.L, p.gamma), 1)
    h = h + h.T
    h[p.L, p.L] = mu
    return h


def build_tower_matrix(g: BaseGraph, p: TowerParams, cap: int = DENSE_CAP) -> np.ndarray:
    dim = g.n * (p.L + 1)
    if dim > cap:
        raise CapacityError(f"towered matrix dimension {dim} exceeds dense cap {cap}")
    bottom = np.zeros((p.L + 1, p.L + 1))
    bottom[p.L, p.L] = 1.0
    return np.kron(g.adjacency, bottom) + np.kron(np.eye(g.n), path_matrix(0.0, p))


def direct_spectrum(g: BaseGraph, p: TowerParams, cap: int = DENSE_CAP) -> TowerSpectrum:
    """Ground truth: diagonalize the full towered matrix, weight = |<u,0|psi>|^2."""
    h = build_tower_matrix(g, p, cap)
    w, v = symmetric_eigh(h)
    top = g.distinguished * (p.L + 1)
    return TowerSpectrum(
        lambdas=w,
        weights=v[top] ** 2,
        channel=np.full(len(w), -1, dtype=int),
        params=p,
        source=DIRECT,
    )


def tridiag_reference(mu: float, p: TowerParams) -> np.ndarray:
    """Ascending eigenvalues of the path Hamiltonian via the dense eigensolver."""
    return symmetric_eigh(path_matrix(mu, p))[0]
