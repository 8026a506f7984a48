from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

import config
from errors import InvalidArgumentError, SingularInputError

# Exterior algebra over a fixed orthonormal coframe e^1..e^n.
# A form is a dense coefficient vector of length 2**n; basis monomial e^{i1..ik}
# lives at the bitmask with bits i1-1, ..., ik-1 set.

MAX_DIMENSION = 4


def _check_dimension(n):
    if not isinstance(n, (int, np.integer)) or not 0 < n <= MAX_DIMENSION:
        raise InvalidArgumentError(f"Coframe dimension must be in 1..{MAX_DIMENSION}, got {n}")


def mask_to_indices(mask):
    return tuple(i + 1 for i in range(MAX_DIMENSION) if mask >> i & 1)


def canonical_index(indices, n):
    # Returns (sign, mask). sign is 0 when an index repeats.
    for i in indices:
        if not 1 <= i <= n:
            raise InvalidArgumentError(f"Coframe index {i} outside 1..{n}")
    if len(set(indices)) != len(indices):
        return 0, 0
    inversions = sum(1 for a in range(len(indices)) for b in range(a + 1, len(indices))
                     if indices[a] > indices[b])
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return (-1 if inversions % 2 else 1), mask


@lru_cache(maxsize=None)
def mask_degrees(n):
    degrees = np.array([bin(m).count("1") for m in range(1 << n)])
    degrees.setflags(write=False)
    return degrees


@lru_cache(maxsize=None)
def structure_tensor(n):
    """W[p, q, r] = sign of e^p ^ e^q = sign * e^r, zero when p and q overlap."""
    size = 1 << n
    w = np.zeros((size, size, size))
    for p in range(size):
        for q in range(size):
            if p & q:
                continue
            # each index j of q passes the indices of p that are larger than j
            swaps = sum(bin(p >> (j + 1)).count("1") for j in range(n) if q >> j & 1)
            w[p, q, p | q] = -1.0 if swaps % 2 else 1.0
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class ExteriorForm:
    """Inhomogeneous form with real coefficients."""

    dimension: int
    data: np.ndarray
    # series truncation estimate of the producing computation, not propagated by arithmetic
    tail_bound: float = field(default=0.0, compare=False)

    def __post_init__(self):
        _check_dimension(self.dimension)
        arr = np.array(self.data, dtype=float)
        if arr.shape != (1 << self.dimension,):
            raise InvalidArgumentError(
                f"Coefficient vector of shape {arr.shape} does not fit dimension {self.dimension}")
        if config.PRUNE_THRESHOLD > 0:
            arr[np.abs(arr) < config.PRUNE_THRESHOLD] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros(1 << n))

    @classmethod
    def constant(cls, n, value):
        data = np.zeros(1 << n)
        data[0] = value
        return cls(n, data)

    @classmethod
    def basis(cls, n, *indices):
        """The monomial e^{i1} ^ ... ^ e^{ik}, indices 1-based in any order."""
        sign, mask = canonical_index(indices, n)
        data = np.zeros(1 << n)
        data[mask] = sign
        return cls(n, data)

    @classmethod
    def from_terms(cls, n, terms):
        """Build from a mapping of index tuples to coefficients."""
        data = np.zeros(1 << n)
        for indices, value in terms.items():
            sign, mask = canonical_index(tuple(indices), n)
            data[mask] += sign * value
        return cls(n, data)

    @property
    def coefficients(self):
        return {mask_to_indices(m): float(v) for m, v in enumerate(self.data) if v != 0.0}

    @property
    def scalar(self):
        return float(self.data[0])

    @property
    def top(self):
        return float(self.data[-1])

    def coefficient(self, *indices):
        sign, mask = canonical_index(indices, self.dimension)
        return sign * float(self.data[mask]) if sign else 0.0

    def nilpotent(self):
        data = self.data.copy()
        data[0] = 0.0
        return ExteriorForm(self.dimension, data)

    def degree_component(self, k):
        return degree_component(self, k)

    def is_zero(self, atol=0.0):
        return bool(np.all(np.abs(self.data) <= atol))

    def max_abs(self):
        return float(np.max(np.abs(self.data)))

    def allclose(self, other, atol=1e-12, rtol=0.0):
        _check_same(self, other)
        return bool(np.allclose(self.data, other.data, atol=atol, rtol=rtol))

    def with_tail(self, bound):
        return ExteriorForm(self.dimension, self.data, tail_bound=float(bound))

    def __add__(self, other):
        other = _coerce(other, self.dimension)
        _check_same(self, other)
        return ExteriorForm(self.dimension, self.data + other.data)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self.dimension)
        _check_same(self, other)
        return ExteriorForm(self.dimension, self.data - other.data)

    def __rsub__(self, other):
        return _coerce(other, self.dimension) - self

    def __neg__(self):
        return ExteriorForm(self.dimension, -self.data)

    def __mul__(self, value):
        if isinstance(value, ExteriorForm):
            return wedge(self, value)
        return ExteriorForm(self.dimension, self.data * float(value))

    def __rmul__(self, value):
        return ExteriorForm(self.dimension, self.data * float(value))

    def __xor__(self, other):
        return wedge(self, other)

    def __repr__(self):
        terms = " + ".join(
            f"{v:.6g}" + ("e^" + "".join(map(str, k)) if k else "")
            for k, v in self.coefficients.items())
        return f"ExteriorForm(n={self.dimension}: {terms or '0'})"


def _coerce(value, n):
    if isinstance(value, ExteriorForm):
        return value
    return ExteriorForm.constant(n, float(value))


def _check_same(a, b):
    if a.dimension != b.dimension:
        raise InvalidArgumentError(f"Coframe dimension mismatch: {a.dimension} vs {b.dimension}")


def wedge(a, b):
    _check_same(a, b)
    n = a.dimension
    if not np.any(a.data[1:]):
        return ExteriorForm(n, a.data[0] * b.data)
    if not np.any(b.data[1:]):
        return ExteriorForm(n, b.data[0] * a.data)
    return ExteriorForm(n, np.einsum("p,q,pqr->r", a.data, b.data, structure_tensor(n)))


def linear_combine(terms, dimension=None):
    """Sum of (weight, form) pairs; plain numbers stand for constant forms."""
    terms = list(terms)
    dims = {form.dimension for _, form in terms if isinstance(form, ExteriorForm)}
    if dimension is not None:
        dims.add(dimension)
    if len(dims) != 1:
        raise InvalidArgumentError(f"linear_combine needs exactly one coframe dimension, got {sorted(dims)}")
    n = dims.pop()
    data = np.zeros(1 << n)
    for weight, form in terms:
        data = data + float(weight) * _coerce(form, n).data
    return ExteriorForm(n, data)


def degree_component(a, k):
    if not 0 <= k <= a.dimension:
        raise InvalidArgumentError(f"Degree {k} outside 0..{a.dimension}")
    return ExteriorForm(a.dimension, np.where(mask_degrees(a.dimension) == k, a.data, 0.0))


def compose_scalar(a, derivatives):
    # F(a0 + N) = sum_j F^(j)(a0) N^j / j!, derivatives listed from F(a0) up
    n = a.dimension
    nil = a.nilpotent()
    result = ExteriorForm.constant(n, derivatives[0])
    power = ExteriorForm.constant(n, 1.0)
    for j, value in enumerate(derivatives[1:], start=1):
        power = wedge(power, nil)
        if power.is_zero():
            break
        result = result + power * (value / factorial(j))
    return result


def exp_form(a):
    n = a.dimension
    base = np.exp(a.scalar)
    return compose_scalar(a, [base] * (n + 1))


def sqrt_form(a):
    x0 = a.scalar
    if x0 <= 0.0:
        raise SingularInputError(f"Square root needs a positive degree-0 part, got {x0:.6g}")
    derivatives = []
    coefficient = 1.0
    for j in range(a.dimension + 1):
        derivatives.append(coefficient * x0 ** (0.5 - j))
        coefficient *= 0.5 - j
    return compose_scalar(a, derivatives)


