"""Dense projector construction and small SPD solves.

Everything here works on plain float64 numpy arrays in row-major layout.
Matrices are validated on entry (finite, non-empty); results are new arrays,
never views into caller data, so values are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NotSPDError, SingularGramError

#: Estimated Gram condition number beyond which a zero-loading projector
#: build is rejected as rank deficient.
CONDITION_LIMIT = 1e12

#: Relative asymmetry tolerated by the SPD solver before refusing the input.
SYMMETRY_RTOL = 1e-8


def as_matrix(values, *, name: str = "matrix") -> np.ndarray:
    """Coerce ``values`` to a 2-D float64 array, rejecting non-finite entries.

    1-D input is treated as a single row.
    """
    a = np.array(values, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be 2-D with at least one row and one column")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class Projector:
    """Symmetric operator projecting row vectors onto a coefficient row space.

    For coefficients ``theta`` (r x m) the matrix is
    ``theta.T @ inv(theta @ theta.T + loading * I) @ theta`` (m x m). With
    ``loading == 0`` this is the orthogonal projector onto the row space of
    ``theta``: symmetric, idempotent, eigenvalues in {0, 1}. Positive loading
    shrinks it toward zero while keeping eigenvalues inside [0, 1].
    """

    dim: int
    matrix: np.ndarray
    loading: float

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix, name="projector matrix")
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"projector matrix must be {self.dim}x{self.dim}")
        if self.loading < 0:
            raise ValueError("loading must be >= 0")
        object.__setattr__(self, "matrix", m)


def solve_spd(gram, rhs) -> np.ndarray:
    """Solve ``gram @ X = rhs`` for symmetric positive definite ``gram``.

    Uses a Cholesky factorization; no explicit inverse is ever formed.

    Parameters
    ----------
    gram : (m, m) array_like, symmetric positive definite
    rhs : (m,) or (m, p) array_like

    Returns
    -------
    X : ndarray with the same shape as ``rhs``.

    Raises
    ------
    NotSPDError
        If ``gram`` is visibly asymmetric or the factorization fails.
    """
    g = as_matrix(gram, name="gram")
    if g.shape[0] != g.shape[1]:
        raise ValueError("gram must be square")
    scale = max(1.0, float(np.abs(g).max()))
    if float(np.abs(g - g.T).max()) > SYMMETRY_RTOL * scale:
        raise NotSPDError("gram matrix is not symmetric")
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape[0] != g.shape[0]:
        raise ValueError("rhs row count must match gram dimension")
    try:
        factor = cho_factor(g, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"Cholesky factorization failed: {exc}") from exc
    return cho_solve(factor, b, check_finite=False)


def projector_from_coefficients(theta, loading: float = 0.0) -> Projector:
    """Build the row-space projector of a coefficient matrix.

    Parameters
    ----------
    theta : (r, m) array_like with r <= m
        Coefficient matrix whose row space defines the constraint set.
    loading : float, >= 0
        Diagonal loading added to the Gram matrix before solving. Zero
        requires ``theta @ theta.T`` to be numerically invertible.

    Returns
    -------
    Projector of dimension m.

    Raises
    ------
    SingularGramError
        When ``loading == 0`` and the Gram matrix fails to factor or its
        estimated condition number exceeds ``CONDITION_LIMIT``.
    """
    t = as_matrix(theta, name="theta")
    r, m = t.shape
    if r > m:
        raise ValueError(f"theta has more rows ({r}) than columns ({m})")
    if loading < 0:
        raise ValueError("loading must be >= 0")
    gram = t @ t.T
    if loading == 0.0:
        cond = float(np.linalg.cond(gram))
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularGramError(
                f"gram condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; "
                "coefficients are rank deficient (consider loading > 0)"
            )
    else:
        gram = gram + loading * np.eye(r)
    try:
        x = solve_spd(gram, t)
    except NotSPDError as exc:
        raise SingularGramError(f"gram factorization failed: {exc}") from exc
    p = t.T @ x
    p = 0.5 * (p + p.T)
    return Projector(dim=m, matrix=p, loading=float(loading))


def project_rows(psi, proj: Projector) -> np.ndarray:
    """Right-multiply ``psi`` by the projector: each row is mapped into the
    coefficient row space (exactly, when ``proj.loading == 0``)."""
    a = as_matrix(psi, name="psi")
    if a.shape[1] != proj.dim:
        raise ValueError(
            f"psi has {a.shape[1]} columns but projector dimension is {proj.dim}"
        )
    return a @ proj.matrix
