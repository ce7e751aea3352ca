import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subspacenet.errors import NotSPDError, SingularGramError
from subspacenet.linalg import (
    Projector,
    as_matrix,
    project_rows,
    projector_from_coefficients,
    solve_spd,
)


def gauss_jordan_inverse(a):
    """Row-reduction inverse, independent of the Cholesky solve path."""
    n = a.shape[0]
    aug = np.hstack([a.astype(float).copy(), np.eye(n)])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


def well_conditioned_theta(rng, r, m, cond_limit=1e3):
    """Random full-row-rank coefficients; resampled so the Gram stays far
    from the rank-deficiency threshold and 1e-10 relative checks are
    numerically meaningful."""
    while True:
        theta = rng.standard_normal((r, m))
        s = np.linalg.svd(theta, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] <= cond_limit:
            return theta


def rel(err, ref):
    return err / max(1.0, ref)


class TestProjectorExamples:
    def test_orthonormal_rows_give_identity(self):
        p = projector_from_coefficients(np.eye(2))
        assert np.allclose(p.matrix, np.eye(2), atol=1e-14)
        assert p.dim == 2 and p.loading == 0.0

    def test_single_ones_row(self):
        p = projector_from_coefficients(np.array([[1.0, 1.0]]))
        assert np.allclose(p.matrix, np.full((2, 2), 0.5), atol=1e-14)

    def test_scalar_with_loading(self):
        p = projector_from_coefficients(np.array([[1.0]]), loading=0.1)
        assert np.allclose(p.matrix, [[1.0 / 1.1]], atol=1e-15)

    def test_duplicated_rows_are_singular(self):
        with pytest.raises(SingularGramError):
            projector_from_coefficients(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_more_rows_than_columns_rejected(self):
        with pytest.raises(ValueError):
            projector_from_coefficients(np.ones((3, 2)))

    def test_negative_loading_rejected(self):
        with pytest.raises(ValueError):
            projector_from_coefficients(np.eye(2), loading=-1e-3)


class TestProjectRows:
    def test_identity_projector_keeps_rows(self):
        rng = np.random.default_rng(0)
        psi = rng.standard_normal((4, 3))
        p = projector_from_coefficients(np.eye(3))
        assert np.allclose(project_rows(psi, p), psi, atol=1e-14)

    def test_orthogonal_row_maps_to_zero(self):
        p = projector_from_coefficients(np.array([[1.0, 1.0]]))
        out = project_rows(np.array([[1.0, -1.0]]), p)
        assert np.allclose(out, [[0.0, 0.0]], atol=1e-14)

    def test_in_span_row_is_fixed(self):
        p = projector_from_coefficients(np.array([[1.0, 1.0]]))
        out = project_rows(np.array([[2.0, 2.0]]), p)
        assert np.allclose(out, [[2.0, 2.0]], atol=1e-14)

    def test_dimension_mismatch(self):
        p = projector_from_coefficients(np.eye(3))
        with pytest.raises(ValueError):
            project_rows(np.ones((2, 2)), p)


class TestSolveSpd:
    def test_identity(self):
        rhs = np.arange(6.0).reshape(3, 2)
        assert np.allclose(solve_spd(np.eye(3), rhs), rhs, atol=1e-15)

    def test_diagonal(self):
        out = solve_spd(np.diag([2.0, 4.0]), np.array([[2.0], [4.0]]))
        assert np.allclose(out, [[1.0], [1.0]], atol=1e-15)

    def test_against_explicit_inverse_oracle(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((5, 5))
        gram = a @ a.T + 5.0 * np.eye(5)
        rhs = rng.standard_normal((5, 3))
        expected = gauss_jordan_inverse(gram) @ rhs
        got = solve_spd(gram, rhs)
        assert np.linalg.norm(got - expected) <= 1e-9 * np.linalg.norm(rhs)
        # residual contract
        assert np.linalg.norm(gram @ got - rhs) <= 1e-9 * np.linalg.norm(rhs)

    def test_not_positive_definite(self):
        with pytest.raises(NotSPDError):
            solve_spd(np.diag([1.0, -1.0]), np.ones((2, 1)))

    def test_asymmetric_rejected(self):
        with pytest.raises(NotSPDError):
            solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones((2, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_projector_properties(r, extra, seed):
    m = r + extra
    rng = np.random.default_rng(seed)
    theta = well_conditioned_theta(rng, r, m)
    p = projector_from_coefficients(theta).matrix
    norm_p = np.linalg.norm(p)
    assert rel(np.linalg.norm(p - p.T), norm_p) <= 1e-12
    assert rel(np.linalg.norm(p @ p - p), norm_p) <= 1e-10
    assert np.linalg.norm(p @ theta.T - theta.T) <= 1e-10 * max(1.0, np.linalg.norm(theta))
    eigs = np.linalg.eigvalsh(p)
    assert eigs.min() >= -1e-10 and eigs.max() <= 1 + 1e-10
    assert int((eigs > 0.5).sum()) == r


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_loading_monotone_and_bounded(r, extra, seed):
    rng = np.random.default_rng(seed)
    theta = well_conditioned_theta(rng, r, r + extra)
    etas = [0.0, 1e-8, 1e-4, 1e-2, 1.0]
    norms = [
        np.linalg.norm(projector_from_coefficients(theta, eta).matrix) for eta in etas
    ]
    for bigger, smaller in zip(norms, norms[1:]):
        assert smaller <= bigger + 1e-12
    for eta in etas[1:]:
        eigs = np.linalg.eigvalsh(projector_from_coefficients(theta, eta).matrix)
        assert eigs.min() >= -1e-10 and eigs.max() <= 1 + 1e-10


@pytest.mark.parametrize("seed", range(8))
def test_loading_continuity(seed):
    rng = np.random.default_rng(seed)
    theta = well_conditioned_theta(rng, 3, 7, cond_limit=10.0)
    base = projector_from_coefficients(theta).matrix
    sigma_min = np.linalg.svd(theta @ theta.T, compute_uv=False)[-1]
    for eta in (1e-8, 1e-6, 1e-4):
        shifted = projector_from_coefficients(theta, eta).matrix
        assert np.linalg.norm(shifted - base) <= 10.0 * eta / sigma_min


class TestValidation:
    def test_as_matrix_rejects_nan(self):
        with pytest.raises(ValueError):
            as_matrix(np.array([[1.0, np.nan]]))

    def test_as_matrix_promotes_vectors_to_rows(self):
        assert as_matrix(np.array([1.0, 2.0])).shape == (1, 2)

    def test_projector_shape_checked(self):
        with pytest.raises(ValueError):
            Projector(dim=3, matrix=np.eye(2), loading=0.0)

    def test_projector_negative_loading_checked(self):
        with pytest.raises(ValueError):
            Projector(dim=2, matrix=np.eye(2), loading=-0.5)
