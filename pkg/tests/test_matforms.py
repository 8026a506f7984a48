from math import pi

import numpy as np
import pytest
import sympy as sp

import config
from errors import DomainError, InvalidArgumentError
from exterior import ExteriorForm
from matforms import (FormMatrix, a_hat_germ, a_hat_inner_germ, abar, adapted_series_order, apply_germ,
                      characteristic_coefficients, exp_germ, exp_trace_germ, l_germ, l_inner_germ, lbar, mat_mul,
                      pfaffian, spectral_radius, star_second, trace)

_x = sp.Symbol("x")
SYMPY_GERMS = {
    "l_inner": (l_inner_germ, (_x / 2) / sp.tanh(_x / 2)),
    "l": (l_germ, sp.log((_x / 2) / sp.tanh(_x / 2)) / 2),
    "a_hat_inner": (a_hat_inner_germ, (_x / 2) / sp.sinh(_x / 2)),
    "a_hat": (a_hat_germ, sp.log((_x / 2) / sp.sinh(_x / 2)) / 2),
    "exp": (exp_germ, sp.exp(_x)),
}


def rotation(angle, size=2, n=2):
    block = np.zeros((size, size))
    block[0, 1], block[1, 0] = angle, -angle
    return FormMatrix.from_scalar(block, n)


def random_matrix(rng, size=3, n=3):
    return FormMatrix(n, rng.normal(size=(size, size, 1 << n)))


def random_antisymmetric(rng, degree, scale, size=4, n=3):
    m = FormMatrix(n, rng.normal(scale=scale, size=(size, size, 1 << n))).degree_component(degree)
    return m - m.transpose()


# Test the first Taylor coefficients of the L germs
def test_l_germ_leading_coefficients():
    inner = l_inner_germ().taylor
    assert inner[:7] == pytest.approx([1.0, 0.0, 1 / 12, 0.0, -1 / 720, 0.0, 1 / 30240], abs=1e-16)
    outer = l_germ().taylor
    assert outer[:5] == pytest.approx([0.0, 0.0, 1 / 24, 0.0, -7 / 2880], abs=1e-16)


@pytest.mark.parametrize("name", sorted(SYMPY_GERMS))
# Test every germ's Taylor coefficients against an independent sympy expansion
def test_germ_coefficients_match_sympy(name):
    factory, expr = SYMPY_GERMS[name]
    series = sp.series(expr, _x, 0, 15).removeO()
    expected = [float(series.coeff(_x, k)) for k in range(15)]
    assert factory().taylor[:15] == pytest.approx(expected, rel=1e-12, abs=1e-18)


# Test the radii recorded on the germs
def test_germ_radii():
    assert l_inner_germ().radius == pytest.approx(2 * pi)
    assert l_germ().radius == pytest.approx(pi)
    assert a_hat_germ().radius == pytest.approx(2 * pi)
    assert exp_germ().radius == float("inf")


@pytest.mark.parametrize("x", [0.0, 0.3, 0.99, 1.01, 2.0, 5.0, -3.0])
# Test lbar against its closed form and finite differences on both sides of the series switch
def test_lbar_values_and_derivatives(x):
    expected = 1.0 if x == 0.0 else (x / 2) / np.tan(x / 2)
    assert lbar(x) == pytest.approx(expected, rel=1e-13)
    h = 1e-5
    assert lbar(x, 1) == pytest.approx((lbar(x + h) - lbar(x - h)) / (2 * h), abs=1e-8)
    assert lbar(x, 2) == pytest.approx((lbar(x + h, 1) - lbar(x - h, 1)) / (2 * h), abs=1e-8)


@pytest.mark.parametrize("x", [0.5, 2.5, -4.0])
# Test abar against its closed form and finite differences
def test_abar_values_and_derivatives(x):
    assert abar(x) == pytest.approx((x / 2) / np.sin(x / 2), rel=1e-13)
    h = 1e-5
    assert abar(x, 1) == pytest.approx((abar(x + h) - abar(x - h)) / (2 * h), abs=1e-8)
    assert abar(x, 2) == pytest.approx((abar(x + h, 1) - abar(x - h, 1)) / (2 * h), abs=1e-8)


# Test the poles of lbar are reported as domain errors
def test_lbar_pole():
    with pytest.raises(DomainError):
        lbar(2 * pi)


# Test evaluation of germs at imaginary arguments agrees with the series
def test_eval_i_matches_series():
    f = l_germ()
    for x in (0.2, 0.8, 1.5):
        assert f.eval_i(x) == pytest.approx(f.series_at_i(x), abs=1e-12)
        assert f.eval_i_d1(x) == pytest.approx(f.series_at_i(x, 1), abs=1e-12)
        assert f.eval_i_d2(x) == pytest.approx(f.series_at_i(x, 2), abs=1e-11)


# Test exp of a scalar rotation generator is the rotation matrix
def test_exp_of_rotation_generator():
    angle = 0.8
    result = apply_germ(exp_germ(), rotation(angle)).scalar_part()
    expected = np.array([[np.cos(angle), np.sin(angle)], [-np.sin(angle), np.cos(angle)]])
    assert result == pytest.approx(expected, abs=1e-14)
    assert spectral_radius(rotation(angle)) == pytest.approx(angle)


# Test series are refused outside their convergence radius
def test_apply_germ_outside_radius():
    with pytest.raises(DomainError) as info:
        apply_germ(l_germ(), rotation(4.0))
    assert info.value.spectral_radius == pytest.approx(4.0)


# Test invalid series orders
@pytest.mark.parametrize("order", [0, 65])
def test_invalid_series_order(order):
    with pytest.raises(InvalidArgumentError):
        apply_germ(exp_germ(), rotation(0.1), order)


# Test the series order is raised near the convergence radius and capped
def test_adapted_series_order():
    f = l_germ()
    assert adapted_series_order((f,), 0.1, 16) == 16
    near = adapted_series_order((f,), 2.0, 16)
    assert 16 < near < config.MAX_SERIES_ORDER
    assert f.tail_bound(2.0, near) <= config.SERIES_TOLERANCE
    assert adapted_series_order((f,), 3.1, 16) == config.MAX_SERIES_ORDER


# Test the germ series stays accurate for rotation angles close to the radius
@pytest.mark.parametrize("angle", [1.5, 2.0, 2.3])
def test_apply_germ_near_radius(angle):
    f = l_germ()
    value = trace(apply_germ(f, rotation(angle))).scalar
    assert value == pytest.approx(2 * f.eval_i(angle).real, abs=1e-13)


# Test the matrix product of forms is associative
def test_mat_mul_associative():
    rng = np.random.default_rng(7)
    a, b, c = (random_matrix(rng) for _ in range(3))
    assert mat_mul(mat_mul(a, b), c).allclose(mat_mul(a, mat_mul(b, c)), atol=1e-12)


# Test a degree-0 factor can be moved cyclically under the trace
def test_trace_cyclic_with_degree_zero_factor():
    rng = np.random.default_rng(11)
    p = FormMatrix.from_scalar(rng.normal(size=(3, 3)), 3)
    a, b = random_matrix(rng), random_matrix(rng)
    assert trace(p @ a @ b).allclose(trace(a @ b @ p), atol=1e-12)


# Test star_second is the derivative of f' in the direction b
def test_star_second_is_directional_derivative():
    rng = np.random.default_rng(3)
    a = FormMatrix.from_scalar(rng.normal(scale=0.4, size=(3, 3)), 1)
    b = FormMatrix.from_scalar(rng.normal(scale=0.4, size=(3, 3)), 1)
    h = 1e-5
    f = exp_germ()
    numeric = (apply_germ(f, a + b * h).scalar_part() - apply_germ(f, a - b * h).scalar_part()) / (2 * h)
    assert star_second(f, a, b).scalar_part() == pytest.approx(numeric, abs=1e-8)


# Test star_second refuses a first argument with forms of positive degree
def test_star_second_needs_scalar():
    rng = np.random.default_rng(5)
    with pytest.raises(InvalidArgumentError):
        star_second(exp_germ(), random_matrix(rng), random_matrix(rng))


# Test star_second at a vanishing first argument is f''(0) times the second
def test_star_second_at_zero():
    rng = np.random.default_rng(13)
    b = random_antisymmetric(rng, 1, 1.0)
    f = l_germ()
    result = star_second(f, FormMatrix.zeros(4, 3), b)
    assert result.allclose(b * f.second_derivative_at_zero(), atol=1e-16)


# Test star_second on commuting scalars is f''(a) b
def test_star_second_scalar_arguments():
    a = FormMatrix.from_scalar(0.3 * np.eye(2), 1)
    b = FormMatrix.from_scalar(0.7 * np.eye(2), 1)
    assert star_second(exp_germ(), a, b).scalar_part() == pytest.approx(np.exp(0.3) * 0.7 * np.eye(2), abs=1e-14)


# Test star_second of an even germ does not see the sign of its first argument
@pytest.mark.parametrize("seed", range(4))
def test_star_second_even_in_first_argument(seed):
    rng = np.random.default_rng(seed)
    a = random_antisymmetric(rng, 0, 0.4)
    b = random_antisymmetric(rng, 2, 1.0)
    f = l_germ()
    assert np.array_equal(star_second(f, -a, b).data, star_second(f, a, b).data)


# Test exp(Tr f(R - N)) factors as exp(Tr f(N)) (1 - Tr[f'(N) R]) in three dimensions
@pytest.mark.parametrize("seed", range(4))
def test_exp_trace_factorization(seed):
    rng = np.random.default_rng(seed)
    n_mat = random_antisymmetric(rng, 0, 0.3)
    r_mat = random_antisymmetric(rng, 2, 0.5)
    f = l_germ()
    full = exp_trace_germ(f, r_mat - n_mat)
    weight = np.exp(trace(apply_germ(f, n_mat)).scalar)
    factored = (1.0 - trace(mat_mul(apply_germ(f.derivative(), n_mat), r_mat))) * weight
    assert full.allclose(factored, atol=1e-10)


# Test f'(R - N) expands as -f'(N) + f^[2](N)*R in three dimensions
@pytest.mark.parametrize("seed", range(4))
def test_derivative_expansion(seed):
    rng = np.random.default_rng(seed)
    n_mat = random_antisymmetric(rng, 0, 0.3)
    r_mat = random_antisymmetric(rng, 2, 0.5)
    f = l_germ()
    full = apply_germ(f.derivative(), r_mat - n_mat)
    expanded = star_second(f, n_mat, r_mat) - apply_germ(f.derivative(), n_mat)
    assert full.allclose(expanded, atol=1e-10)


# Test characteristic coefficients of scalar matrices agree with numpy
def test_characteristic_coefficients_scalar():
    m = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 3.0], [0.0, 1.0, 2.0]])
    coeffs = characteristic_coefficients(FormMatrix.from_scalar(m, 2))
    assert [c.scalar for c in coeffs] == pytest.approx(np.poly(m)[::-1], abs=1e-12)


# Test characteristic coefficients refuse odd-degree entries
def test_characteristic_coefficients_odd_entries():
    m = FormMatrix.from_entries(2, 2, {(0, 1): ExteriorForm.basis(2, 1)})
    with pytest.raises(InvalidArgumentError):
        characteristic_coefficients(m)


# Test the Pfaffian squares to the determinant
def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(13)
    block = rng.normal(size=(4, 4))
    block = block - block.T
    pf = pfaffian(FormMatrix.from_scalar(block, 4)).scalar
    assert pf * pf == pytest.approx(np.linalg.det(block), rel=1e-12)


# Test form matrices reject inconsistent shapes
def test_form_matrix_shape_checks():
    with pytest.raises(InvalidArgumentError):
        FormMatrix(2, np.zeros((3, 3, 8)))
    with pytest.raises(InvalidArgumentError):
        FormMatrix.zeros(3, 2) + FormMatrix.zeros(2, 2)
    with pytest.raises(InvalidArgumentError):
        pfaffian(FormMatrix.zeros(3, 2))
