"""Dense symmetric-matrix helpers for the information computations.

Every matrix handled here is tiny (dimension 1 to 4): sensitivity,
variability, Godambe and Fisher information matrices, and the model
covariances they are built from.  All functions are pure and operate on
plain ``numpy`` arrays; symmetric inputs are re-symmetrized on output so
equality of mirrored entries is exact.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, SingularMatrix

#: Relative floor used by :func:`sym_invert`: a matrix counts as singular
#: when ``|det| <= SINGULAR_TOL_FACTOR * (max |entry|) ** dim``.
SINGULAR_TOL_FACTOR = 1e-12


def symmetrize(m) -> np.ndarray:
    """Return ``(m + m.T) / 2`` as a float array, making symmetry exact."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def asymmetry(m) -> float:
    """Relative asymmetry ``max|m - m.T| / max(1, max|m|)`` of a square matrix."""
    a = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    return float(np.max(np.abs(a - a.T))) / scale


def singular_tolerance(m: np.ndarray) -> float:
    """Scale-aware determinant floor: ``1e-12 * (max |entry|) ** dim``."""
    a = np.asarray(m, dtype=float)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return SINGULAR_TOL_FACTOR * scale ** a.shape[0]


def sym_invert(m) -> np.ndarray:
    """Invert a small symmetric matrix.

    Parameters
    ----------
    m : array_like
        Symmetric matrix of dimension 1..4.

    Returns
    -------
    numpy.ndarray
        The inverse, re-symmetrized so mirrored entries match exactly.

    Raises
    ------
    SingularMatrix
        If ``|det(m)|`` is at or below the scale-aware tolerance.
    """
    a = symmetrize(m)
    det = float(np.linalg.det(a))
    if abs(det) <= singular_tolerance(a):
        raise SingularMatrix(f"determinant {det:g} below tolerance "
                             f"{singular_tolerance(a):g}")
    return symmetrize(np.linalg.inv(a))


def is_psd(m, tol: float) -> bool:
    """Test positive semidefiniteness up to an eigenvalue floor.

    Parameters
    ----------
    m : array_like
        Symmetric matrix.
    tol : float
        Nonnegative slack: the verdict is true iff every eigenvalue
        is ``>= -tol``.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = symmetrize(m)
    return bool(np.min(np.linalg.eigvalsh(a)) >= -tol)


def loewner_geq(a, b, tol: float) -> bool:
    """Matrix-inequality ordering: is ``a - b`` positive semidefinite?

    Parameters
    ----------
    a, b : array_like
        Symmetric matrices of equal dimension.
    tol : float
        Eigenvalue slack passed through to :func:`is_psd`.

    Raises
    ------
    DimensionMismatch
        If the two matrices differ in shape.
    """
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    if aa.shape != bb.shape:
        raise DimensionMismatch(f"shapes {aa.shape} and {bb.shape} differ")
    return is_psd(aa - bb, tol)


def cholesky_lower(m) -> np.ndarray:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If the factorization fails.
    """
    a = symmetrize(m)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def solve_sym(m, rhs) -> np.ndarray:
    """Solve ``m @ x = rhs`` for symmetric nonsingular ``m``.

    Equivalent to ``sym_invert(m) @ rhs`` but via a direct solve.
    """
    a = symmetrize(m)
    det = float(np.linalg.det(a))
    if abs(det) <= singular_tolerance(a):
        raise SingularMatrix(f"determinant {det:g} below tolerance")
    return np.linalg.solve(a, np.asarray(rhs, dtype=float))
