"""Dense symmetric eigensolver with an enforced residual contract."""

from __future__ import annotations

import numpy as np

from .errors import NumericalContractError

RESIDUAL_RTOL = 1e-10


def symmetric_eigh(a: np.ndarray, rtol: float = RESIDUAL_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.

    Raises NumericalContractError when ``max_k ||A v_k - lambda_k v_k|| > rtol * ||A||``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-14):
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(a)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size:
        resid = float(np.max(np.linalg.norm(a @ v - v * w, axis=0)))
        if resid > rtol * max(scale, 1.0):
            raise NumericalContractError(
                f"eigensolver residual {resid:.3e} exceeds {rtol:g} * ||A|| = {rtol * scale:.3e}"
            )
    return w, v


def symmetric_eigvals(a: np.ndarray, rtol: float = RESIDUAL_RTOL) -> np.ndarray:
    return symmetric_eigh(a, rtol)[0]
