import numpy as np
import pytest
from hypothesis import given, strategies as st

from errors import InvalidArgumentError, SingularInputError
from exterior import (ExteriorForm, compose_scalar, degree_component, exp_form, linear_combine, sqrt_form,
                      wedge)

small_ints = st.lists(st.integers(min_value=-3, max_value=3), min_size=16, max_size=16)


def form(values):
    return ExteriorForm(4, np.array(values, dtype=float))


# Test basis monomials pick up the parity sign of their index order
def test_basis_sign_and_repeated_index():
    assert ExteriorForm.basis(4, 2, 1).coefficient(1, 2) == -1.0
    assert ExteriorForm.basis(4, 3, 1, 2).coefficient(1, 2, 3) == 1.0
    assert ExteriorForm.basis(4, 1, 1).is_zero()
    assert ExteriorForm.basis(4, 1, 2).coefficient(2, 1) == -1.0


# Test one-forms anticommute and square to zero
def test_one_forms_anticommute():
    e1, e2 = ExteriorForm.basis(4, 1), ExteriorForm.basis(4, 2)
    assert (e1 ^ e2).allclose(-(e2 ^ e1), atol=0.0)
    assert (e1 ^ e1).is_zero()
    top = ExteriorForm.basis(4, 1) ^ ExteriorForm.basis(4, 2) ^ ExteriorForm.basis(4, 3) ^ ExteriorForm.basis(4, 4)
    assert top.top == 1.0


@given(small_ints, small_ints, small_ints)
# Test the wedge product is associative (integer coefficients keep float arithmetic exact)
def test_wedge_associative(a, b, c):
    a, b, c = form(a), form(b), form(c)
    assert wedge(wedge(a, b), c).allclose(wedge(a, wedge(b, c)), atol=0.0)


@given(small_ints, small_ints)
# Test graded commutativity: a^b = (-1)^(pq) b^a for homogeneous parts
def test_graded_commutativity(a, b):
    a, b = form(a), form(b)
    for p in range(5):
        for q in range(5):
            ap, bq = degree_component(a, p), degree_component(b, q)
            assert wedge(ap, bq).allclose(wedge(bq, ap) * (-1) ** (p * q), atol=0.0)


@given(small_ints, small_ints, small_ints)
# Test the wedge product distributes over addition
def test_wedge_distributive(a, b, c):
    a, b, c = form(a), form(b), form(c)
    assert wedge(a, b + c).allclose(wedge(a, b) + wedge(a, c), atol=0.0)


# Test degree components split a form
def test_degree_components_sum_to_form():
    a = form(np.arange(16))
    total = linear_combine([(1.0, degree_component(a, k)) for k in range(5)])
    assert total.allclose(a, atol=0.0)
    assert degree_component(a, 4).coefficients == {(1, 2, 3, 4): 15.0}


# Test exp of a nilpotent sum factors into exponentials
def test_exp_form_matches_product():
    x = ExteriorForm.basis(4, 1, 2) * 0.7
    y = ExteriorForm.basis(4, 3, 4) * -1.3
    lhs = exp_form(x + y + 0.2)
    rhs = exp_form(x) * exp_form(y) * np.exp(0.2)
    assert lhs.allclose(rhs, atol=1e-14)
    assert lhs.top == pytest.approx(np.exp(0.2) * 0.7 * -1.3)


# Test the exterior square root squares back
def test_sqrt_form_squares_back():
    a = (ExteriorForm.constant(4, 2.0) + ExteriorForm.basis(4, 1, 2) * 0.5
         + ExteriorForm.basis(4, 3, 4) * -0.25 + ExteriorForm.basis(4, 1, 2, 3, 4) * 0.1)
    root = sqrt_form(a)
    assert (root * root).allclose(a, atol=1e-14)


# Test square roots of forms without a positive scalar part are rejected
def test_sqrt_form_singular():
    with pytest.raises(SingularInputError):
        sqrt_form(ExteriorForm.basis(4, 1, 2))


# Test compose_scalar with the derivatives of x^3 reproduces the cube
def test_compose_scalar_polynomial():
    a = ExteriorForm.constant(4, 1.5) + ExteriorForm.basis(4, 1, 2) + ExteriorForm.basis(4, 3, 4) * 2.0
    x0 = 1.5
    cube = compose_scalar(a, [x0 ** 3, 3 * x0 ** 2, 6 * x0, 6.0])
    assert cube.allclose(a * a * a, atol=1e-13)


# Test invalid dimensions, indices and shapes
@pytest.mark.parametrize("make", [
    lambda: ExteriorForm.zero(5),
    lambda: ExteriorForm.basis(3, 4),
    lambda: ExteriorForm(4, np.zeros(8)),
    lambda: ExteriorForm.zero(3) + ExteriorForm.zero(4),
    lambda: degree_component(ExteriorForm.zero(2), 3),
])
def test_invalid_arguments(make):
    with pytest.raises(InvalidArgumentError):
        make()
