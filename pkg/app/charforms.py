from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

import config
from errors import InvalidArgumentError
from exterior import ExteriorForm, exp_form, wedge
from matforms import (FormMatrix, a_hat_germ, adapted_series_order, apply_germ, exp_germ, exp_trace_germ,
                      germ_from_powers, l_germ, mat_mul, matrix_powers, resolve_series_order, spectral_radius,
                      star_second, trace)

# Equivariant characteristic forms and their transgressions along a family of connections.

ANTISYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = config.QUADRATURE_NODES

    def __post_init__(self):
        if self.nodes < 2:
            raise InvalidArgumentError(f"Quadrature needs at least 2 nodes, got {self.nodes}")

    def points(self):
        """Gauss-Legendre nodes and weights on [0, 1], nodes ascending."""
        x, w = leggauss(self.nodes)
        return (x + 1.0) / 2.0, w / 2.0

    def integrate(self, integrand):
        nodes, weights = self.points()
        workers = min(config.thread_count(), self.nodes)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(integrand, nodes))
        else:
            values = [integrand(t) for t in nodes]
        # fixed left-to-right summation over ascending nodes
        total = values[0] * weights[0]
        for value, weight in zip(values[1:], weights[1:]):
            total = total + value * weight
        return total


def _check_antisymmetric(m, label):
    if not m.is_antisymmetric(ANTISYMMETRY_TOLERANCE * max(1.0, m.max_abs())):
        raise InvalidArgumentError(f"{label} must be antisymmetric")


@dataclass(frozen=True)
class ConnectionFamily:
    """The family of connections nabla^t = nabla^0 + t*Theta with its moment and curvature."""

    theta: FormMatrix
    nabla_x_at: Callable[[float], FormMatrix]
    curvature_at: Callable[[float], FormMatrix]

    def __post_init__(self):
        _check_antisymmetric(self.theta, "Theta")

    @classmethod
    def from_endpoints(cls, theta, nabla_x0, nabla_x1, curvature0, d_theta):
        """R^t = R^0 + t*d_theta + t^2*Theta^2 and a linear path of moments."""
        for label, m in (("nabla^0 X", nabla_x0), ("nabla^1 X", nabla_x1)):
            if not m.is_scalar():
                raise InvalidArgumentError(f"{label} must be of degree 0")
            _check_antisymmetric(m, label)
        _check_antisymmetric(curvature0, "R^0")
        theta_sq = theta @ theta

        def nabla_x_at(t):
            return nabla_x0 * (1.0 - t) + nabla_x1 * t

        def curvature_at(t):
            return curvature0 + d_theta * t + theta_sq * (t * t)

        return cls(theta, nabla_x_at, curvature_at)

    def with_scaled_action(self, s):
        base = self.nabla_x_at
        return replace(self, nabla_x_at=lambda t: base(t) * s)

    def equivariant_curvature_at(self, t):
        return equivariant_curvature(self.curvature_at(t), self.nabla_x_at(t))


def equivariant_curvature(r, nabla_x):
    """R - nabla X."""
    if r.size != nabla_x.size:
        raise InvalidArgumentError(f"Matrix size mismatch: {r.size} vs {nabla_x.size}")
    if not nabla_x.is_scalar():
        raise InvalidArgumentError("nabla X must be of degree 0")
    _check_antisymmetric(r, "Curvature")
    _check_antisymmetric(nabla_x, "nabla X")
    return r - nabla_x


def l_form(rg, order=None):
    return exp_trace_germ(l_germ(), rg, order)


def a_hat_form(rg, order=None):
    return exp_trace_germ(a_hat_germ(), rg, order)


def chern_form(fg, grading, order=None):
    """Supertrace of exp(-F)."""
    grading = list(grading)
    if len(grading) != fg.size:
        raise InvalidArgumentError(f"Grading of length {len(grading)} for a matrix of size {fg.size}")
    exp_matrix = apply_germ(exp_germ(), -fg, order)
    result = ExteriorForm.zero(fg.dimension)
    for i, sign in enumerate(grading):
        result = result + exp_matrix.entry(i, i) * sign
    return result.with_tail(exp_matrix.tail_bound)


def transgression(f, fam, quad, order=None):
    """int_0^1 exp(Tr f(R_g^t)) Tr[Theta f'(R_g^t)] dt."""
    order = resolve_series_order(order)
    f_d1 = f.derivative()

    def integrand(t):
        rg = fam.equivariant_curvature_at(t)
        rho = spectral_radius(rg)
        f.check_radius(rho)
        k = adapted_series_order((f, f_d1), rho, order)
        powers = matrix_powers(rg, 2 * k + 1)
        value = germ_from_powers(f, powers, k, rho)
        slope = germ_from_powers(f_d1, powers, k, rho)
        return wedge(exp_form(trace(value)), trace(mat_mul(fam.theta, slope)))

    return quad.integrate(integrand)


def _require_even(f):
    if not f.even:
        raise InvalidArgumentError(f"Degree-3 transgression formulas need an even germ, got {f.name}")


def _moment_germs(f, nabla_x, order):
    if not nabla_x.is_scalar():
        raise InvalidArgumentError("nabla^t X must be of degree 0")
    rho = spectral_radius(nabla_x)
    f.check_radius(rho)
    f_d1 = f.derivative()
    order = adapted_series_order((f, f_d1), rho, order)
    powers = matrix_powers(nabla_x, 2 * order + 1)
    value = germ_from_powers(f, powers, order, rho)
    slope = germ_from_powers(f_d1, powers, order, rho)
    return np.exp(trace(value).scalar), slope


def transgression_degree3(f, fam, quad, order=None):
    # integrand exp(Tr f(N)) * (Tr[Theta f'(N)] Tr[f'(N) R^t] + Tr[(f^[2](N)*Theta) R^t]), N = nabla^t X
    _require_even(f)
    order = resolve_series_order(order)

    def integrand(t):
        nabla_x = fam.nabla_x_at(t)
        curvature = fam.curvature_at(t)
        weight, slope = _moment_germs(f, nabla_x, order)
        first = wedge(trace(mat_mul(fam.theta, slope)), trace(mat_mul(slope, curvature)))
        second = trace(mat_mul(star_second(f, nabla_x, fam.theta, order), curvature))
        return (first + second).degree_component(3) * weight

    return quad.integrate(integrand)


def transgression_degree3_alt(f, fam, quad, order=None):
    """Same quantity via exp(Tr f(N)) (1 + Tr[Theta f'(N)]) Tr[f'(Theta + N) R^t]."""
    _require_even(f)
    order = resolve_series_order(order)
    f_d1 = f.derivative()

    def integrand(t):
        nabla_x = fam.nabla_x_at(t)
        curvature = fam.curvature_at(t)
        weight, slope = _moment_germs(f, nabla_x, order)
        shifted = apply_germ(f_d1, fam.theta + nabla_x, order)
        factor = trace(mat_mul(fam.theta, slope)) + 1.0
        return wedge(factor, trace(mat_mul(shifted, curvature))).degree_component(3) * weight

    return quad.integrate(integrand)


def flat_limit_transgression(f, fam, quad):
    """f''(0) int_0^1 Tr[Theta R^t] dt, the limit of transgression_degree3 as the moment shrinks to 0."""
    scale = f.second_derivative_at_zero()

    def integrand(t):
        return trace(mat_mul(fam.theta, fam.curvature_at(t))).degree_component(3) * scale

    return quad.integrate(integrand)


def product_transgression(t_beta1, beta2_at1, beta1_at0, t_beta2):
    """T(beta1 ^ beta2) = T(beta1) ^ beta2(1) + beta1(0) ^ T(beta2)."""
    return wedge(t_beta1, beta2_at1) + wedge(beta1_at0, t_beta2)

