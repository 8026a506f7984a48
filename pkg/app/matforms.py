import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import cos, inf, log, pi, sin
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P

import config
from errors import DomainError, InvalidArgumentError
from exterior import ExteriorForm, exp_form, mask_degrees, structure_tensor

# Matrices of exterior forms and the power-series calculus applied to them.
# Matrix indices are 0-based; coframe indices inside entries stay 1-based.

TAYLOR_LENGTH = 2 * config.MAX_SERIES_ORDER + 4


@dataclass(frozen=True, eq=False)
class FormMatrix:
    """Square matrix of forms over one coframe: data[i, j] is the coefficient vector of entry (i, j)."""

    dimension: int
    data: np.ndarray
    tail_bound: float = field(default=0.0, compare=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 1 << self.dimension:
            raise InvalidArgumentError(
                f"Form matrix data of shape {arr.shape} is not square over dimension {self.dimension}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def size(self):
        return self.data.shape[0]

    @classmethod
    def zeros(cls, size, n):
        return cls(n, np.zeros((size, size, 1 << n)))

    @classmethod
    def identity(cls, size, n):
        return cls.from_scalar(np.eye(size), n)

    @classmethod
    def from_scalar(cls, matrix, n):
        matrix = np.asarray(matrix, dtype=float)
        data = np.zeros(matrix.shape + (1 << n,))
        data[..., 0] = matrix
        return cls(n, data)

    @classmethod
    def from_entries(cls, size, n, entries, antisymmetric=False):
        """Build from {(i, j): ExteriorForm}. With antisymmetric, only i < j may be given."""
        data = np.zeros((size, size, 1 << n))
        for (i, j), form in entries.items():
            if form.dimension != n:
                raise InvalidArgumentError(f"Entry ({i}, {j}) has dimension {form.dimension}, expected {n}")
            if antisymmetric:
                if i >= j:
                    raise InvalidArgumentError(f"Antisymmetric entries must satisfy i < j, got ({i}, {j})")
                data[j, i] = -form.data
            data[i, j] = form.data
        return cls(n, data)

    def entry(self, i, j):
        return ExteriorForm(self.dimension, self.data[i, j])

    def scalar_part(self):
        return np.array(self.data[..., 0])

    def is_scalar(self):
        return not np.any(self.data[..., 1:])

    def degree_component(self, k):
        keep = mask_degrees(self.dimension) == k
        return FormMatrix(self.dimension, np.where(keep, self.data, 0.0))

    def transpose(self):
        return FormMatrix(self.dimension, np.transpose(self.data, (1, 0, 2)))

    def is_antisymmetric(self, atol=0.0):
        return bool(np.all(np.abs(self.data + np.transpose(self.data, (1, 0, 2))) <= atol))

    def pullback(self):
        """Restrict to the hypersurface annihilated by the last coframe vector."""
        n = self.dimension
        if n < 2:
            raise InvalidArgumentError("Cannot pull back a one-dimensional coframe")
        return FormMatrix(n - 1, self.data[..., : 1 << (n - 1)])

    def max_abs(self):
        return float(np.max(np.abs(self.data)))

    def allclose(self, other, atol=1e-12, rtol=0.0):
        _check_compatible(self, other)
        return bool(np.allclose(self.data, other.data, atol=atol, rtol=rtol))

    def with_tail(self, bound):
        return replace(self, tail_bound=float(bound))

    def __add__(self, other):
        _check_compatible(self, other)
        return FormMatrix(self.dimension, self.data + other.data)

    def __sub__(self, other):
        _check_compatible(self, other)
        return FormMatrix(self.dimension, self.data - other.data)

    def __neg__(self):
        return FormMatrix(self.dimension, -self.data)

    def __mul__(self, value):
        return FormMatrix(self.dimension, self.data * float(value))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return mat_mul(self, other)


def _check_compatible(a, b):
    if a.size != b.size:
        raise InvalidArgumentError(f"Matrix size mismatch: {a.size} vs {b.size}")
    if a.dimension != b.dimension:
        raise InvalidArgumentError(f"Coframe dimension mismatch: {a.dimension} vs {b.dimension}")


def mat_mul(a, b):
    _check_compatible(a, b)
    if a.is_scalar():
        data = np.einsum("ij,jkr->ikr", a.data[..., 0], b.data)
    elif b.is_scalar():
        data = np.einsum("ijr,jk->ikr", a.data, b.data[..., 0])
    else:
        left = np.tensordot(a.data, structure_tensor(a.dimension), axes=([2], [0]))
        data = np.einsum("ijqr,jkq->ikr", left, b.data)
    return FormMatrix(a.dimension, data)


def trace(a):
    return ExteriorForm(a.dimension, np.einsum("iir->r", a.data))


def spectral_radius(m):
    scalar = m.scalar_part()
    if not np.any(scalar):
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(scalar))))


def matrix_powers(m, count):
    """[I, M, M^2, ..., M^count]."""
    powers = [FormMatrix.identity(m.size, m.dimension)]
    for _ in range(count):
        powers.append(mat_mul(powers[-1], m))
    return powers


def resolve_series_order(order):
    order = config.SERIES_ORDER if order is None else int(order)
    if not 1 <= order <= config.MAX_SERIES_ORDER:
        raise InvalidArgumentError(f"Series order must be in 1..{config.MAX_SERIES_ORDER}, got {order}")
    return order


def adapted_series_order(germs, rho, order=None):
    # smallest order, at least the requested one, whose omitted terms all stay below SERIES_TOLERANCE
    order = resolve_series_order(order)
    while order < config.MAX_SERIES_ORDER and max(g.tail_bound(rho, order) for g in germs) > config.SERIES_TOLERANCE:
        order += 1
    return order


@dataclass(frozen=True, eq=False)
class AnalyticGerm:
    """Germ at 0 given by Taylor coefficients c_k = f^(k)(0)/k!."""

    name: str
    taylor: np.ndarray
    radius: float
    even: bool = False
    odd: bool = False
    # f(ix), f'(ix), f''(ix) for real x as complex numbers
    eval_i: Optional[Callable] = None
    eval_i_d1: Optional[Callable] = None
    eval_i_d2: Optional[Callable] = None

    def __post_init__(self):
        arr = np.array(self.taylor, dtype=float)
        if self.even:
            arr[1::2] = 0.0
        if self.odd:
            arr[0::2] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "taylor", arr)

    def derivative(self):
        k = np.arange(1, len(self.taylor))
        return AnalyticGerm(
            name=f"{self.name}'",
            taylor=k * self.taylor[1:],
            radius=self.radius,
            even=self.odd,
            odd=self.even,
            eval_i=self.eval_i_d1,
            eval_i_d1=self.eval_i_d2,
        )

    def second_derivative_at_zero(self):
        return 2.0 * self.taylor[2]

    def tail_bound(self, rho, order):
        k = 2 * order + 2
        return sum(abs(self.taylor[j]) * rho ** j for j in (k, k + 1) if j < len(self.taylor))

    def check_radius(self, rho):
        if rho >= self.radius:
            raise DomainError(
                f"Spectral radius {rho:.6g} is outside the convergence radius {self.radius:.6g} of {self.name}",
                spectral_radius=rho)

    def series_at_i(self, x, derivative=0):
        coeffs = self.taylor
        for _ in range(derivative):
            coeffs = P.polyder(coeffs)
        return complex(P.polyval(1j * x, coeffs))


def _exp_coefficients(scale=1.0, parity=None):
    # sum_k (scale*x)^k / k!, optionally restricted to even or odd k
    coeffs = np.zeros(TAYLOR_LENGTH)
    term = 1.0
    for k in range(TAYLOR_LENGTH):
        if k:
            term *= scale / k
        coeffs[k] = term
    if parity == "even":
        coeffs[1::2] = 0.0
    elif parity == "odd":
        coeffs[0::2] = 0.0
    return coeffs


def _series_divide(num, den):
    q = np.zeros(TAYLOR_LENGTH)
    for k in range(TAYLOR_LENGTH):
        q[k] = (num[k] - np.dot(den[1:k + 1], q[k - 1::-1][:k])) / den[0]
    return q


def _series_log(h):
    # log h for h_0 = 1:  k g_k = k h_k - sum_{j<k} j g_j h_{k-j}
    g = np.zeros(TAYLOR_LENGTH)
    for k in range(1, TAYLOR_LENGTH):
        acc = sum(j * g[j] * h[k - j] for j in range(1, k))
        g[k] = h[k] - acc / k
    return g


def _sinhc_half():
    # sinh(x/2)/(x/2)
    odd = _exp_coefficients(0.5, "odd")
    return np.append(odd[1:] * 2.0, 0.0)


def lbar(x, derivative=0):
    """(x/2)cot(x/2) and its first two derivatives."""
    if abs(x) < 1.0:
        return (1j ** derivative * l_inner_germ().series_at_i(x, derivative)).real
    s = sin(x / 2)
    if abs(s) < 1e-14:
        raise DomainError(f"(x/2)cot(x/2) has a pole at x = {x:.6g}", spectral_radius=abs(x))
    cot = cos(x / 2) / s
    csc2 = 1.0 / (s * s)
    if derivative == 0:
        return x / 2 * cot
    if derivative == 1:
        return 0.5 * cot - x / 4 * csc2
    if derivative == 2:
        return -0.5 * csc2 + x / 4 * csc2 * cot
    raise InvalidArgumentError(f"Derivative order {derivative} not available")


def abar(x, derivative=0):
    """(x/2)/sin(x/2) and its first two derivatives."""
    if abs(x) < 1.0:
        return (1j ** derivative * a_hat_inner_germ().series_at_i(x, derivative)).real
    s = sin(x / 2)
    if abs(s) < 1e-14:
        raise DomainError(f"(x/2)/sin(x/2) has a pole at x = {x:.6g}", spectral_radius=abs(x))
    csc = 1.0 / s
    cot = cos(x / 2) * csc
    if derivative == 0:
        return x / 2 * csc
    if derivative == 1:
        return 0.5 * csc - x / 4 * csc * cot
    if derivative == 2:
        return -0.5 * csc * cot + x / 8 * csc * (cot * cot + csc * csc)
    raise InvalidArgumentError(f"Derivative order {derivative} not available")


def _inner_evaluators(fn):
    # f(ix) = F(x), f'(ix) = -i F'(x), f''(ix) = -F''(x)
    return (lambda x: complex(fn(x)),
            lambda x: -1j * fn(x, 1),
            lambda x: complex(-fn(x, 2)))


def _half_log_evaluators(fn, name):
    def value(x):
        v = fn(x)
        if v <= 0.0:
            raise DomainError(f"log of {name} undefined at x = {x:.6g}", spectral_radius=abs(x))
        return v

    def d0(x):
        return complex(0.5 * log(value(x)))

    def d1(x):
        return -0.5j * fn(x, 1) / value(x)

    def d2(x):
        v = value(x)
        ratio = fn(x, 1) / v
        return complex(-0.5 * (fn(x, 2) / v - ratio * ratio))

    return d0, d1, d2


@lru_cache(maxsize=None)
def l_inner_germ():
    """(x/2)/tanh(x/2)."""
    taylor = _series_divide(_exp_coefficients(0.5, "even"), _sinhc_half())
    d0, d1, d2 = _inner_evaluators(lbar)
    return AnalyticGerm("(x/2)/tanh(x/2)", taylor, 2 * pi, even=True, eval_i=d0, eval_i_d1=d1, eval_i_d2=d2)


@lru_cache(maxsize=None)
def l_germ():
    """Half the log of (x/2)/tanh(x/2); exp(Tr f(R)) is the L-form."""
    taylor = 0.5 * _series_log(l_inner_germ().taylor)
    d0, d1, d2 = _half_log_evaluators(lbar, "(x/2)cot(x/2)")
    return AnalyticGerm("L", taylor, pi, even=True, eval_i=d0, eval_i_d1=d1, eval_i_d2=d2)


@lru_cache(maxsize=None)
def a_hat_inner_germ():
    """(x/2)/sinh(x/2)."""
    one = np.zeros(TAYLOR_LENGTH)
    one[0] = 1.0
    taylor = _series_divide(one, _sinhc_half())
    d0, d1, d2 = _inner_evaluators(abar)
    return AnalyticGerm("(x/2)/sinh(x/2)", taylor, 2 * pi, even=True, eval_i=d0, eval_i_d1=d1, eval_i_d2=d2)


@lru_cache(maxsize=None)
def a_hat_germ():
    taylor = 0.5 * _series_log(a_hat_inner_germ().taylor)
    d0, d1, d2 = _half_log_evaluators(abar, "(x/2)/sin(x/2)")
    return AnalyticGerm("A-hat", taylor, 2 * pi, even=True, eval_i=d0, eval_i_d1=d1, eval_i_d2=d2)


@lru_cache(maxsize=None)
def exp_germ():
    return AnalyticGerm(
        "exp", _exp_coefficients(), inf,
        eval_i=lambda x: complex(cos(x), sin(x)),
        eval_i_d1=lambda x: complex(cos(x), sin(x)),
        eval_i_d2=lambda x: complex(cos(x), sin(x)),
    )


def germ_from_powers(f, powers, order, rho):
    """sum_k c_k M^k over precomputed powers, k <= 2*order + 1."""
    data = np.zeros_like(powers[0].data)
    for k in range(min(2 * order + 2, len(powers))):
        c = f.taylor[k]
        if c != 0.0:
            data = data + c * powers[k].data
    tail = f.tail_bound(rho, order)
    if tail > config.TAIL_WARNING:
        logging.warning(f"Series tail bound {tail:.3e} for germ {f.name} at spectral radius {rho:.6g}")
    return FormMatrix(powers[0].dimension, data, tail_bound=tail)


def apply_germ(f, m, order=None):
    rho = spectral_radius(m)
    f.check_radius(rho)
    order = adapted_series_order((f,), rho, order)
    return germ_from_powers(f, matrix_powers(m, 2 * order + 1), order, rho)


def star_second(f, a, b, order=None):
    """f^[2](a)*b = sum_n (n+1) c_{n+1} H_n(a, b) with H_n = sum_q a^q b a^(n-1-q), a of degree 0."""
    if not a.is_scalar():
        raise InvalidArgumentError("star_second needs a degree-0 first argument")
    _check_compatible(a, b)
    rho = spectral_radius(a)
    f.check_radius(rho)
    f_d2 = f.derivative().derivative()
    order = adapted_series_order((f_d2,), rho, order)
    result = np.zeros_like(b.data)
    h = b
    a_power = a
    for n in range(1, 2 * order + 1):
        c = (n + 1) * f.taylor[n + 1]
        if c != 0.0:
            result = result + c * h.data
        # H_{n+1} = a H_n + b a^n
        h = mat_mul(a, h) + mat_mul(b, a_power)
        a_power = mat_mul(a_power, a)
    return FormMatrix(b.dimension, result, tail_bound=f_d2.tail_bound(rho, order))


def exp_trace_germ(f, m, order=None):
    fm = apply_germ(f, m, order)
    return exp_form(trace(fm)).with_tail(fm.tail_bound)


def characteristic_coefficients(m):
    """Coefficients [c_0, ..., c_n] of det(lambda - M) for M with even-degree (commuting) entries."""
    odd = mask_degrees(m.dimension) % 2 == 1
    if np.any(m.data[..., odd]):
        raise InvalidArgumentError("Characteristic polynomial needs entries of even degree")
    size = m.size
    coeffs = [None] * (size + 1)
    coeffs[size] = ExteriorForm.constant(m.dimension, 1.0)
    identity = FormMatrix.identity(size, m.dimension)
    running = FormMatrix.zeros(size, m.dimension)
    # Faddeev-LeVerrier
    for k in range(1, size + 1):
        running = mat_mul(m, running) + _scale_identity(identity, coeffs[size - k + 1])
        coeffs[size - k] = trace(mat_mul(m, running)) * (-1.0 / k)
    return coeffs


def _scale_identity(identity, form):
    return FormMatrix(identity.dimension, identity.data[..., :1] * form.data)


def pfaffian(m):
    if m.size != 4:
        raise InvalidArgumentError(f"Pfaffian implemented for 4x4 matrices, got {m.size}x{m.size}")
    e = m.entry
    return e(0, 1) * e(2, 3) - e(0, 2) * e(1, 3) + e(0, 3) * e(1, 2)
