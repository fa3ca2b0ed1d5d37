"""Dense eigenvalue helpers.

The analysis pipelines only ever need full spectra of real square matrices
(Jacobians of the velocity field), so the surface here is deliberately small:
``eig_spectrum`` returns all eigenvalues, ``spectral_abscissa`` and
``spectral_radius`` reduce them. The solve itself is LAPACK's balanced
Hessenberg + shifted QR via numpy; non-convergence is surfaced as a
ConvergenceError naming the matrix size.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DimensionError

__all__ = ["eig_spectrum", "spectral_abscissa", "spectral_radius"]


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def eig_spectrum(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real square matrix, as complex128.

    Complex eigenvalues of a real matrix come in conjugate pairs; no ordering
    is guaranteed beyond what the QR iteration produces.
    """
    a = _check_square(a)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    try:
        return np.linalg.eigvals(a).astype(np.complex128, copy=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(
            f"QR iteration failed to converge for {a.shape[0]}x{a.shape[1]} matrix"
        ) from exc


def spectral_abscissa(a: np.ndarray) -> float:
    """max Re(lambda): the linear stability indicator of a velocity Jacobian."""
    eigs = eig_spectrum(a)
    if eigs.size == 0:
        raise DimensionError("spectral abscissa of an empty matrix is undefined")
    return float(np.max(eigs.real))


def spectral_radius(a: np.ndarray) -> float:
    """max |lambda| over the spectrum."""
    eigs = eig_spectrum(a)
    if eigs.size == 0:
        raise DimensionError("spectral radius of an empty matrix is undefined")
    return float(np.max(np.abs(eigs)))
