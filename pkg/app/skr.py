import logging
from dataclasses import dataclass
from functools import cached_property, partial
from math import pi, sqrt
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import Polynomial

import config
from charforms import ConnectionFamily, QuadratureSpec, equivariant_curvature, l_form, transgression_degree3
from errors import InvalidArgumentError, ProfileError, SingularInputError
from exterior import ExteriorForm, compose_scalar, sqrt_form
from matforms import FormMatrix, l_germ, lbar, pfaffian, resolve_series_order

# Four-dimensional SKR geometry in the orthonormal frame e1 = w/|w|, e2 = J e1, e3 = u/sqrt(Q), e4 = -v/sqrt(Q).

IRREDUCIBLE = "irreducible"
REDUCIBLE = "reducible"


@dataclass(frozen=True)
class SKRProfile:
    """SKR data. Irreducible profiles carry phi and c_bar; reducible ones carry Q directly."""

    mode: str
    phi: Optional[Callable] = None
    phi_d: Optional[Callable] = None
    phi_dd: Optional[Callable] = None
    q_fun: Optional[Callable] = None
    q_d: Optional[Callable] = None
    q_dd: Optional[Callable] = None
    c_bar: float = 0.0
    a_const: float = 1.0
    base_curv: float = 0.0
    tau_min: float = -1.0
    base_area: float = 1.0
    fiber_period: float = 2 * pi

    def __post_init__(self):
        if self.mode == IRREDUCIBLE:
            if self.phi is None or self.phi_d is None:
                raise ProfileError("Irreducible profile needs phi and its derivative")
            if self.tau_min <= self.c_bar <= 0.0:
                raise ProfileError(f"c_bar = {self.c_bar} lies inside the tau range [{self.tau_min}, 0]")
        elif self.mode == REDUCIBLE:
            if self.q_fun is None or self.q_d is None:
                raise ProfileError("Reducible profile needs Q and its derivative")
        else:
            raise ProfileError(f"Unknown profile mode {self.mode!r}")
        if self.a_const == 0.0:
            raise ProfileError("The constant a must be nonzero")
        if self.tau_min >= 0.0:
            raise ProfileError(f"tau_min must be negative, got {self.tau_min}")
        if self.base_area <= 0.0 or self.fiber_period <= 0.0:
            raise ProfileError("base_area and fiber_period must be positive")

    @property
    def reducible(self):
        return self.mode == REDUCIBLE

    @property
    def tau_range(self):
        return (self.tau_min, 0.0)

    def volume_weight(self, tau):
        """Horizontal area factor 2|tau - c_bar|, replaced by 1 in the reducible case."""
        return 1.0 if self.reducible else 2.0 * abs(tau - self.c_bar)


def polynomial_profile(mode, coefficients, **kwargs):
    """Profile from polynomial coefficients in tau, lowest degree first (phi or Q by mode)."""
    poly = Polynomial(np.asarray(coefficients, dtype=float))
    derivs = dict(zip(("d", "dd"), (poly.deriv(1), poly.deriv(2))))
    if mode == IRREDUCIBLE:
        return SKRProfile(mode, phi=poly, phi_d=derivs["d"], phi_dd=derivs["dd"], **kwargs)
    return SKRProfile(mode, q_fun=poly, q_d=derivs["d"], q_dd=derivs["dd"], **kwargs)


def tabulated_profile(mode, taus, values, order=3, **kwargs):
    """Least-squares polynomial fit of the given order through tabulated samples."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if taus.shape != values.shape or taus.size <= order:
        raise ProfileError(f"Need more than {order} matching tau/value samples, got {taus.size}/{values.size}")
    fitted = Polynomial.fit(taus, values, deg=order).convert()
    logging.info(f"Fitted {mode} profile of order {order} through {taus.size} samples")
    return polynomial_profile(mode, fitted.coef, **kwargs)


class DerivedFunctions(NamedTuple):
    phi: float
    psi: float
    q: float
    phi_d: float
    psi_d: float


class CurvatureComponents(NamedTuple):
    b: float
    c: float
    d: float
    r: float


def _second_derivative(fn_d, fn_dd, tau):
    if fn_dd is not None:
        return float(fn_dd(tau))
    h = config.PHI_FD_STEP
    return (float(fn_d(tau + h)) - float(fn_d(tau - h))) / (2 * h)


def derived_functions(p, tau):
    if p.reducible:
        q = float(p.q_fun(tau))
        psi = 0.5 * float(p.q_d(tau))
        psi_d = 0.5 * _second_derivative(p.q_d, p.q_dd, tau)
        phi = phi_d = 0.0
    else:
        sigma = tau - p.c_bar
        phi = float(p.phi(tau))
        phi_d = float(p.phi_d(tau))
        q = 2.0 * sigma * phi
        psi = phi + sigma * phi_d
        psi_d = 2.0 * phi_d + sigma * _second_derivative(p.phi_d, p.phi_dd, tau)
    if not q > 0.0:
        raise ProfileError(f"Q({tau:.6g}) = {q:.6g} must be positive")
    return DerivedFunctions(phi, psi, q, phi_d, psi_d)


def curvature_components(p, tau):
    df = derived_functions(p, tau)
    if p.reducible:
        return CurvatureComponents(-p.base_curv, 0.0, -df.psi_d, 0.0)
    b = -abs(df.phi / df.q) * p.base_curv - 4.0 * df.phi ** 2 / df.q
    return CurvatureComponents(b, -df.phi_d, -df.psi_d, -df.phi_d / 2.0)


def curvature_matrix(cc, dimension=4):
    e = partial(ExteriorForm.basis, dimension)
    s = e(1, 3) + e(2, 4)
    t = e(1, 4) - e(2, 3)
    return FormMatrix.from_entries(4, dimension, {
        (0, 1): e(1, 2) * cc.b + e(3, 4) * cc.c,
        (2, 3): e(1, 2) * cc.c + e(3, 4) * cc.d,
        (0, 2): s * cc.r,
        (0, 3): t * cc.r,
        (1, 2): t * -cc.r,
        (1, 3): s * cc.r,
    }, antisymmetric=True)


def nabla_x_matrix(phi, psi, dimension=4):
    """phi J_H + psi J_V laid out as <nabla_{e_i} X, e_j>."""
    block = np.zeros((4, 4))
    block[0, 1], block[1, 0] = phi, -phi
    block[2, 3], block[3, 2] = psi, -psi
    return FormMatrix.from_scalar(block, dimension)


def equivariant_curvature_at(p, tau):
    """R - nabla X with nabla X acting as an endomorphism, so entry (0, 1) is phi + b e12 + c e34."""
    df = derived_functions(p, tau)
    cc = curvature_components(p, tau)
    # curvature rows are output indices, the nabla X layout is the transpose
    return equivariant_curvature(curvature_matrix(cc), nabla_x_matrix(df.phi, df.psi).transpose())


def a_form(phi, psi, cc):
    e = partial(ExteriorForm.basis, 4)
    return (ExteriorForm.constant(4, phi ** 2 + psi ** 2)
            + e(1, 2) * (2 * (phi * cc.b + psi * cc.c))
            + e(3, 4) * (2 * (phi * cc.c + psi * cc.d))
            + e(1, 2, 3, 4) * (2 * (cc.b * cc.c + cc.c * cc.d - 4 * cc.r ** 2)))


def sqrt_a_coeffs(phi, psi, cc):
    if phi == 0.0 and psi == 0.0:
        raise SingularInputError("sqrt(A) is singular where phi = psi = 0")
    b, c, d, r = cc
    alpha = sqrt(phi ** 2 + psi ** 2)
    beta = (b * phi + c * psi) / alpha
    gamma = (c * phi + d * psi) / alpha
    delta = ((c * d - 4 * r ** 2) * phi ** 2 + (b * c - 4 * r ** 2) * psi ** 2
             - phi * psi * (b * d + c ** 2)) / alpha ** 3
    return alpha, beta, gamma, delta


def l_form_closed(p, tau):
    """lbar(sqrt A) expanded through degree 4."""
    df = derived_functions(p, tau)
    alpha, beta, gamma, delta = sqrt_a_coeffs(df.phi, df.psi, curvature_components(p, tau))
    e = partial(ExteriorForm.basis, 4)
    slope = lbar(alpha, 1)
    return (ExteriorForm.constant(4, lbar(alpha))
            + (e(1, 2) * beta + e(3, 4) * gamma + e(1, 2, 3, 4) * delta) * slope
            + e(1, 2, 3, 4) * (lbar(alpha, 2) * beta * gamma))


def l_form_generic(p, tau, order=None):
    return l_form(equivariant_curvature_at(p, tau), order)


def l_form_eigen(p, tau):
    """lbar(mu1) lbar(mu2) where mu1^2 + mu2^2 = A and mu1 mu2 = Pf(R_g(X))."""
    rg = equivariant_curvature_at(p, tau)
    df = derived_functions(p, tau)
    area = a_form(df.phi, df.psi, curvature_components(p, tau))
    pf = pfaffian(rg)
    try:
        sigma = sqrt_form(area + pf * 2.0)
        delta = sqrt_form(area - pf * 2.0)
    except SingularInputError as e:
        raise SingularInputError(f"Eigen-angles coincide at tau = {tau:.6g}: {e}")
    result = ExteriorForm.constant(4, 1.0)
    for mu in ((sigma + delta) * 0.5, (sigma - delta) * 0.5):
        result = result * compose_scalar(mu, [lbar(mu.scalar, j) for j in range(3)])
    return result


@dataclass(frozen=True)
class BoundaryData:
    """Data pulled back to the boundary tau = 0, over the 3-dimensional coframe e1, e2, e3."""

    phi0: float
    psi0: float
    q0: float
    r0_1212: float
    r0_2323: float
    r1234: float
    r2314: float
    theta: FormMatrix
    a1: FormMatrix
    a2: FormMatrix

    @property
    def k(self):
        return self.phi0 / sqrt(self.q0)

    @property
    def ell(self):
        return self.psi0 / sqrt(self.q0)

    @cached_property
    def a3(self):
        return self.theta @ self.theta

    def nabla_tx(self, t):
        return nabla_x_matrix(self.phi0, t * self.psi0, dimension=3)

    def curvature_at(self, t):
        return self.a1 + self.a2 * t + self.a3 * (t * t)

    def family(self):
        return ConnectionFamily.from_endpoints(
            self.theta, self.nabla_tx(0.0), self.nabla_tx(1.0), self.a1, self.a2)


def boundary_data(p):
    df = derived_functions(p, 0.0)
    cc = curvature_components(p, 0.0)
    root_q = sqrt(df.q)
    k, ell = df.phi / root_q, df.psi / root_q
    if p.reducible:
        # product of the base with a surface of revolution
        r0_1212, r0_2323 = -p.base_curv, 0.0
    else:
        c2 = p.c_bar ** 2
        r0_1212 = 2 * abs(p.c_bar) * p.base_curv + 3 * df.q / (4 * c2)
        r0_2323 = -df.q / (4 * c2)

    e = partial(ExteriorForm.basis, 3)
    theta = FormMatrix.from_entries(4, 3, {
        (0, 3): e(1) * k,
        (1, 3): e(2) * k,
        (2, 3): e(3) * ell,
    }, antisymmetric=True)
    a1 = FormMatrix.from_entries(4, 3, {
        (0, 1): e(1, 2) * r0_1212,
        (0, 2): e(1, 3) * r0_2323,
        (1, 2): e(2, 3) * r0_2323,
    }, antisymmetric=True)
    # Codazzi: the mixed entries come from the bulk curvature restricted to the boundary
    bulk = curvature_matrix(cc).pullback().data
    mixed = np.zeros_like(bulk)
    mixed[:3, 3] = bulk[:3, 3]
    mixed[3, :3] = bulk[3, :3]
    a2 = FormMatrix(3, mixed)
    return BoundaryData(df.phi, df.psi, df.q, r0_1212, r0_2323, cc.c, -cc.r, theta, a1, a2)


def _m_sum(phi, tpsi, m, parity):
    return sum(phi ** k * tpsi ** (2 * m - k) + tpsi ** k * phi ** (2 * m - k)
               for k in range(parity, 2 * m + 1, 2))


def transgression_integrand_closed(bd, t, order=None, f=None):
    """Coefficient of e123 in the closed boundary transgression integrand at t."""
    f = f or l_germ()
    order = _closed_series_order(bd, order, f)
    k, ell = bd.k, bd.ell
    phi, tpsi = bd.phi0, t * bd.psi0
    f.check_radius(max(abs(phi), abs(tpsi)))
    weight = np.exp(2.0 * (f.eval_i(phi) + f.eval_i(tpsi)))
    d1_phi, d1_tpsi = f.eval_i_d1(phi), f.eval_i_d1(tpsi)
    first = 4 * ell * d1_tpsi * ((t * t * k * k - bd.r0_1212) * d1_phi - t * bd.r1234 * d1_tpsi)
    series = 0.0
    for m in range(order + 1):
        a_m = (2 * m + 2) * f.taylor[2 * m + 2]
        odd = _m_sum(phi, tpsi, m, 1)
        even = _m_sum(phi, tpsi, m, 0)
        series += a_m * (-1) ** m * ((bd.r0_2323 - t * t * k * ell) * odd - t * bd.r2314 * even)
    last = -2 * t * ell * bd.r1234 * f.eval_i_d2(tpsi)
    return (weight * (first + 2 * k * series + last)).real


def _closed_tail(bd, order, f):
    rho = max(abs(bd.phi0), abs(bd.psi0))
    m = order + 1
    a_m = abs((2 * m + 2) * f.taylor[2 * m + 2]) if 2 * m + 2 < len(f.taylor) else 0.0
    scale = abs(bd.r0_2323) + abs(bd.k * bd.ell) + abs(bd.r2314)
    weight = abs(np.exp(2.0 * (f.eval_i(bd.phi0) + f.eval_i(bd.psi0))))
    return float(2 * abs(bd.k) * a_m * 2 * (2 * m + 1) * rho ** (2 * m) * scale * max(weight, 1.0))


def _closed_series_order(bd, order, f):
    order = resolve_series_order(order)
    while order < config.MAX_SERIES_ORDER and _closed_tail(bd, order, f) > config.SERIES_TOLERANCE:
        order += 1
    return order


def closed_tail_bound(p, order=None, f=None):
    """Size of the first omitted term of the closed series over t in [0, 1]."""
    f = f or l_germ()
    bd = boundary_data(p)
    return _closed_tail(bd, _closed_series_order(bd, order, f), f)


def transgression_pullback_closed(p, order=None, quad=None):
    quad = quad or QuadratureSpec()
    bd = boundary_data(p)
    value = quad.integrate(lambda t: transgression_integrand_closed(bd, t, order))
    tail = closed_tail_bound(p, order)
    if tail > config.TAIL_WARNING:
        logging.warning(f"Closed transgression series tail bound {tail:.3e}")
    return (ExteriorForm.basis(3, 1, 2, 3) * float(value)).with_tail(tail)


def transgression_pullback_direct(p, order=None, quad=None):
    quad = quad or QuadratureSpec()
    bd = boundary_data(p)
    form = transgression_degree3(l_germ(), bd.family(), quad, order)
    return ExteriorForm.basis(3, 1, 2, 3) * form.top


def profile_sample_taus(p, count):
    """Interior sample points of (tau_min, 0], excluding the critical end."""
    if count < 1:
        raise InvalidArgumentError(f"Need at least one sample, got {count}")
    return np.linspace(p.tau_min, 0.0, count + 1)[1:]
