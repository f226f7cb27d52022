import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sgcalc.linalg import (
    expm,
    gelfand_estimate,
    op_norm,
    power_opnorm,
    spectral_radius,
    spectral_radius_detail,
)


class TestExpm:
    def test_zero_matrix(self):
        assert np.allclose(expm(np.zeros((4, 4))), np.eye(4), atol=1e-15)

    def test_diagonal_entrywise(self):
        D = np.diag([1.0, -2.0, 0.5 + 1.0j])
        E = expm(D)
        assert np.allclose(np.diag(E), np.exp(np.diag(D)), atol=1e-14)
        assert np.allclose(E - np.diag(np.diag(E)), 0)

    def test_against_scipy_oracle(self):
        rng = np.random.default_rng(3)
        for scale in [0.1, 1.0, 10.0, 40.0]:
            A = scale * (rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
            ref = scipy.linalg.expm(A)
            err = np.linalg.norm(expm(A) - ref) / np.linalg.norm(ref)
            assert err < 1e-11

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            expm(np.zeros((2, 3)))


class TestOpNorm:
    def test_identity(self):
        assert op_norm(np.eye(7)) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal(self):
        assert op_norm(np.diag([3.0, -4.0j])) == pytest.approx(4.0, abs=1e-9)

    def test_against_svd_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            M = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            assert op_norm(M) == pytest.approx(np.linalg.norm(M, 2), abs=1e-9)

    def test_zero(self):
        assert op_norm(np.zeros((3, 3))) == 0.0

    def test_power_iteration_reports_convergence(self):
        rng = np.random.default_rng(1)
        M = rng.normal(size=(6, 6))
        res = power_opnorm(M)
        assert res.converged
        assert res.value == pytest.approx(np.linalg.norm(M, 2), abs=1e-8)


class TestSpectralRadius:
    def test_nilpotent_exact_zero(self):
        N = np.eye(6, k=-2)
        res = spectral_radius_detail(N)
        assert res.value == 0.0
        assert res.exact_path == "nilpotent"

    def test_diagonal(self):
        res = spectral_radius_detail(np.diag([1.0, -3.0, 2.0j]))
        assert res.value == 3.0
        assert res.exact_path == "diagonal"

    def test_triangular(self):
        rng = np.random.default_rng(2)
        M = np.triu(rng.normal(size=(5, 5)))
        assert spectral_radius(M) == pytest.approx(np.max(np.abs(np.diag(M))), abs=1e-12)

    def test_triangular_gelfand_oracle(self):
        # eigenvalue-free route: the norm-of-powers sequence alone
        rng = np.random.default_rng(4)
        M = np.triu(rng.normal(size=(5, 5)))
        est = gelfand_estimate(M, max_squarings=40)[-1]
        assert est == pytest.approx(np.max(np.abs(np.diag(M))), rel=1e-6)

    def test_generic_matches_eigvals(self):
        # the returned value must track the true radius even when the two
        # routes disagree (the Gelfand route wins on non-normal matrices)
        rng = np.random.default_rng(7)
        for _ in range(5):
            M = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
            ref = float(np.max(np.abs(np.linalg.eigvals(M))))
            res = spectral_radius_detail(M)
            assert res.value == pytest.approx(ref, rel=1e-6)

    def test_strict_mode_on_well_separated_normal_matrix(self):
        rng = np.random.default_rng(9)
        Q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        M = Q @ np.diag(np.arange(1.0, 9.0)) @ Q.T
        assert spectral_radius(M, strict=True) == pytest.approx(8.0, rel=1e-7)

    def test_strict_mode_flags_disagreement(self):
        from sgcalc.errors import InconsistentEstimatesError

        # rotation by 90 degrees: both eigenvalues have modulus 1, so the
        # power route collapses while the norm-of-powers route stays at 1
        M = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(InconsistentEstimatesError):
            spectral_radius(M, strict=True)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_norm_dominates_spectral_radius(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert op_norm(M) >= spectral_radius(M) - 1e-8
