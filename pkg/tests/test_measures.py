import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sgcalc.measures import (
    CompactDistribution,
    CompactMeasure,
    Piece,
    conj_reflect,
    convolve,
    dirac,
    from_atoms,
    indicator,
    laplace,
    laplace_distribution,
    mass,
    measure_from_json,
    measure_to_json,
    scale,
    tv_moment,
    zero_measure,
)

D12 = from_atoms([(1.0, 1.0), (2.0, -1.0)])  # delta_1 - delta_2
D1234 = from_atoms([(1.0, 1.0), (2.0, -3.0), (3.0, 1.0), (4.0, 1.0)])
STEP = indicator(1, 2) + indicator(2, 3, -1)  # (chi_[1,2] - chi_[2,3]) dt


def quad_piece(mu, f):
    """Numerical quadrature oracle over the density pieces of mu."""
    total = 0.0 + 0.0j
    for p in mu.pieces:
        re = quad(lambda t: (f(t) * p(t)).real, p.a, p.b, epsabs=1e-12)[0]
        im = quad(lambda t: (f(t) * p(t)).imag, p.a, p.b, epsabs=1e-12)[0]
        total += re + 1j * im
    return total


class TestMass:
    def test_dirac_difference(self):
        assert mass(D12) == 0

    def test_four_atoms(self):
        assert mass(D1234) == 0

    def test_step_density(self):
        assert mass(STEP) == pytest.approx(0, abs=1e-14)

    def test_simpson_oracle_on_quadratic(self):
        mu = CompactMeasure(pieces=(Piece(0.5, 2.5, (1.0, -0.5, 2.0)),))
        assert mass(mu) == pytest.approx(quad_piece(mu, lambda t: 1.0), abs=1e-10)


class TestTvMoment:
    def test_dirac_first_moment(self):
        assert tv_moment(D12, 1) == 3.0

    def test_dirac_zeroth_moment(self):
        assert tv_moment(D12, 0) == 2.0

    def test_step_first_moment(self):
        # int_1^2 t dt + int_2^3 t dt = 1.5 + 2.5
        assert tv_moment(STEP, 1) == pytest.approx(4.0, abs=1e-12)

    def test_sign_splitting_oracle(self):
        # (t - 1.5) changes sign inside [1, 2]
        mu = CompactMeasure(pieces=(Piece(1.0, 2.0, (-1.5, 1.0)),))
        oracle = quad(lambda t: abs(t - 1.5), 1.0, 2.0, epsabs=1e-12)[0]
        assert tv_moment(mu, 0) == pytest.approx(oracle, abs=1e-10)

    def test_complex_piece_quadrature_path(self):
        mu = CompactMeasure(pieces=(Piece(1.0, 2.0, (1.0 + 1.0j,)),))
        assert tv_moment(mu, 0) == pytest.approx(math.sqrt(2.0), abs=1e-9)


class TestLaplace:
    def test_dirac_difference_closed_form(self):
        for s in [0.3, 1.0, 2.0 + 1.0j, -0.5]:
            expected = np.exp(-s) - np.exp(-2 * s)
            assert laplace(D12, s) == pytest.approx(expected, abs=1e-13)

    def test_at_zero_equals_mass(self):
        for mu in [D12, D1234, STEP]:
            assert laplace(mu, 0.0) == pytest.approx(mass(mu), abs=1e-13)

    def test_step_at_one(self):
        expected = math.exp(-1) - 2 * math.exp(-2) + math.exp(-3)
        assert laplace(STEP, 1.0) == pytest.approx(expected, abs=1e-13)
        assert expected == pytest.approx(0.1470, abs=1e-4)

    def test_piece_against_adaptive_quadrature(self):
        mu = CompactMeasure(pieces=(Piece(0.7, 3.1, (0.5, 1.0, -0.25, 0.1)),))
        for z in [0.0, 1e-9, 0.1, 2.0, 1.0 + 3.0j, -1.5, 5.0j]:
            oracle = quad_piece(mu, lambda t: np.exp(-z * t))
            assert laplace(mu, z) == pytest.approx(oracle, abs=1e-10)

    def test_vectorized_matches_scalar(self):
        zs = np.array([0.0, 0.3, 1.0 + 2.0j, -0.2, 4.0])
        vals = laplace(STEP, zs)
        for z, v in zip(zs, vals):
            assert v == pytest.approx(laplace(STEP, complex(z)), abs=1e-13)

    def test_decay_bound(self):
        for mu in [D12, D1234, STEP]:
            tv0 = tv_moment(mu, 0)
            smin = mu.support_min
            for x in np.linspace(0, 20, 41):
                assert abs(laplace(mu, x)) <= tv0 * math.exp(-x * smin) + 1e-12


class TestScale:
    def test_scaled_transform(self):
        mu = STEP + D12
        for u in [0.25, 1.0, 3.0]:
            for z in [0.5, 1.0 + 1.0j, 2.0]:
                assert laplace(scale(mu, u), z) == pytest.approx(
                    laplace(mu, u * z), abs=1e-12
                )


class TestConvolve:
    def test_atom_arithmetic(self):
        conv = convolve(D12, D12)
        assert conv.atoms == ((2.0, 1.0), (3.0, -2.0), (4.0, 1.0))

    def test_hermitian_symmetrization_real(self):
        mu = from_atoms([(1.0, 1.0 + 1.0j), (2.0, -2.0 + 0.5j)])
        nu = convolve(mu, conj_reflect(mu))
        assert nu.is_real

    def test_indicator_square_multiplicative(self):
        box = indicator(1, 2)
        conv = convolve(box, box)
        for z in [1.0, 0.5 + 1.0j, 2.0, 0.0]:
            assert laplace(conv, z) == pytest.approx(laplace(box, z) ** 2, abs=1e-12)

    def test_triangle_shape(self):
        # chi_[1,2] * chi_[1,2] is the triangle peaking at t = 3
        conv = convolve(indicator(1, 2), indicator(1, 2))
        for t, expected in [(2.5, 0.5), (2.999, 0.999), (3.001, 0.999), (3.5, 0.5)]:
            val = sum(p(t) for p in conv.pieces if p.a <= t < p.b)
            assert val == pytest.approx(expected, abs=1e-12)

    def test_atom_times_piece(self):
        conv = convolve(dirac(1.5, 2.0), indicator(1, 2))
        assert len(conv.pieces) == 1
        p = conv.pieces[0]
        assert (p.a, p.b) == (2.5, 3.5)
        for z in [0.7, 1.0 + 0.5j]:
            assert laplace(conv, z) == pytest.approx(
                2.0 * np.exp(-1.5 * z) * laplace(indicator(1, 2), z), abs=1e-12
            )


class TestConjReflect:
    def test_real_fixed_point(self):
        assert conj_reflect(D12) == D12

    def test_complex_atom(self):
        mu = dirac(1.0, 1.0 + 1.0j)
        assert conj_reflect(mu).atoms == ((1.0, 1.0 - 1.0j),)

    def test_laplace_identity(self):
        rng = np.random.default_rng(7)
        mu = from_atoms([(1.0, 1.0 + 2.0j), (2.5, -0.5j)]) + indicator(1, 3, 0.5 - 0.25j)
        for _ in range(20):
            z = complex(rng.normal(), rng.normal())
            lhs = laplace(conj_reflect(mu), z)
            rhs = laplace(mu, z.conjugate()).conjugate()
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_involution(self):
        mu = from_atoms([(1.0, 1.0 + 2.0j)]) + indicator(1, 2, 2.0 - 1.0j)
        assert conj_reflect(conj_reflect(mu)) == mu


class TestDistribution:
    def test_order_zero_reduction(self):
        phi = CompactDistribution(0, (D12,))
        for z in [0.5, 1.0 + 1.0j]:
            assert laplace_distribution(phi, z) == pytest.approx(laplace(D12, z))

    def test_single_first_order_term(self):
        # components (0, delta_1): only j=1 contributes
        phi = CompactDistribution(1, (zero_measure(), dirac(1.0)))
        val = laplace_distribution(phi, 1.0)
        assert val == pytest.approx(-math.exp(-1), abs=1e-13)

    def test_zero_argument(self):
        phi = CompactDistribution(1, (dirac(1.0), dirac(1.0)))
        assert laplace_distribution(phi, 0.0) == pytest.approx(1.0)

    def test_component_count_enforced(self):
        with pytest.raises(ValueError):
            CompactDistribution(2, (D12,))


# ---------------------------------------------------------------------------
# property-based checks

locations = st.floats(min_value=0.5, max_value=4.0)
weights = st.complex_numbers(
    min_magnitude=0.1, max_magnitude=3.0, allow_nan=False, allow_infinity=False
)


@st.composite
def atom_measures(draw):
    n = draw(st.integers(1, 4))
    pairs = [(draw(locations), draw(weights)) for _ in range(n)]
    return from_atoms(pairs)


@st.composite
def mixed_measures(draw):
    mu = draw(atom_measures())
    if draw(st.booleans()):
        a = draw(st.floats(min_value=0.5, max_value=2.0))
        w = draw(weights)
        deg = draw(st.integers(0, 2))
        coeffs = tuple(draw(weights) for _ in range(deg + 1))
        mu = mu + CompactMeasure(pieces=(Piece(a, a + 1.0, coeffs),))
    return mu


@settings(max_examples=40, deadline=None)
@given(mixed_measures(), mixed_measures(), st.integers(0, 19))
def test_convolution_multiplicative(mu, nu, k):
    rng = np.random.default_rng(k)
    z = complex(rng.normal(), rng.normal())
    lhs = laplace(convolve(mu, nu), z)
    rhs = laplace(mu, z) * laplace(nu, z)
    scale_ref = max(1.0, abs(rhs))
    assert abs(lhs - rhs) < 1e-11 * scale_ref


@settings(max_examples=30, deadline=None)
@given(mixed_measures(), mixed_measures())
def test_convolution_commutative(mu, nu):
    z = 0.8 + 0.3j
    assert laplace(convolve(mu, nu), z) == pytest.approx(
        laplace(convolve(nu, mu), z), abs=1e-11
    )


@settings(max_examples=15, deadline=None)
@given(atom_measures(), atom_measures(), atom_measures())
def test_convolution_associative(mu, nu, rho):
    z = 0.4 - 0.7j
    lhs = laplace(convolve(convolve(mu, nu), rho), z)
    rhs = laplace(convolve(mu, convolve(nu, rho)), z)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


@settings(max_examples=40, deadline=None)
@given(mixed_measures())
def test_conj_reflect_involution(mu):
    z = 1.1 + 0.4j
    assert laplace(conj_reflect(conj_reflect(mu)), z) == pytest.approx(
        laplace(mu, z), abs=1e-12
    )


@settings(max_examples=40, deadline=None)
@given(mixed_measures(), st.floats(min_value=0.0, max_value=10.0))
def test_ray_decay_bound(mu, x):
    bound = tv_moment(mu, 0) * math.exp(-x * mu.support_min)
    assert abs(laplace(mu, x)) <= bound * (1 + 1e-9) + 1e-12


def test_json_roundtrip():
    mu = from_atoms([(1.0, 1.0 + 2.0j)]) + indicator(1, 2, 0.5)
    assert measure_from_json(measure_to_json(mu)) == mu


def test_invariants_rejected():
    with pytest.raises(ValueError):
        dirac(-1.0)
    with pytest.raises(ValueError):
        Piece(2.0, 1.0, (1.0,))
    with pytest.raises(ValueError):
        CompactMeasure(pieces=(Piece(1, 3, (1.0,)), Piece(2, 4, (1.0,))))
