import logging
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial.legendre import leggauss

import config
from errors import InvalidArgumentError, ProfileError
from skr import curvature_components, curvature_matrix

# Finite-difference Levi-Civita geometry of the SKR metric on the flat-base chart (tau, s, x, y):
#   g = dtau^2/Q + Q (ds + kappa x dy)^2 + w (dx^2 + dy^2),  w = 2|tau - c_bar| (1 if reducible).
# Only Q comes from the profile; no curvature formula is shared with the closed side.

TAU, S, X, Y = range(4)


@dataclass(frozen=True)
class ChartPoint:
    tau: float
    s: float = 0.0
    x: float = 0.0
    y: float = 0.0

    def coordinates(self):
        return np.array([self.tau, self.s, self.x, self.y])

    @classmethod
    def from_coordinates(cls, coords):
        return cls(*(float(c) for c in coords))

    def shifted(self, axis, step):
        coords = self.coordinates()
        coords[axis] += step
        return ChartPoint.from_coordinates(coords)


@dataclass(frozen=True, eq=False)
class MetricSample:
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.shape != (4, 4) or not np.allclose(g, g.T, atol=1e-14, rtol=0.0):
            raise InvalidArgumentError("Metric sample must be a symmetric 4x4 matrix")
        minors = [np.linalg.det(g[:k, :k]) for k in range(1, 5)]
        if min(minors) <= 0.0:
            raise InvalidArgumentError(f"Metric sample is not positive definite, leading minors {minors}")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)


def _q_value(p, tau):
    if p.reducible:
        q = float(p.q_fun(tau))
    else:
        q = 2.0 * (tau - p.c_bar) * float(p.phi(tau))
    if not q > 0.0:
        raise ProfileError(f"Q({tau:.6g}) = {q:.6g} must be positive on the chart")
    return q


def chart_parameters(p, tau):
    # twist 2*sgn(tau - c_bar) keeps e12 + e34 closed
    if p.reducible:
        return 1.0, 0.0
    sigma = tau - p.c_bar
    return 2.0 * abs(sigma), 2.0 * np.sign(sigma)


def metric_at(p, pt):
    q = _q_value(p, pt.tau)
    w, kappa = chart_parameters(p, pt.tau)
    twist = kappa * pt.x
    g = np.zeros((4, 4))
    g[TAU, TAU] = 1.0 / q
    g[S, S] = q
    g[S, Y] = g[Y, S] = q * twist
    g[X, X] = w
    g[Y, Y] = w + q * twist * twist
    return MetricSample(g)


def frame_at(p, pt):
    """Columns are e1..e4 in chart components."""
    q = _q_value(p, pt.tau)
    w, kappa = chart_parameters(p, pt.tau)
    root_w, root_q = np.sqrt(w), np.sqrt(q)
    frame = np.zeros((4, 4))
    frame[X, 0] = 1.0 / root_w
    frame[Y, 1] = 1.0 / root_w
    frame[S, 1] = -kappa * pt.x / root_w
    frame[S, 2] = 1.0 / root_q
    frame[TAU, 3] = -root_q
    return frame


def _central_difference(fn, pt, h):
    """d[a] = partial_a fn at pt."""
    return np.stack([(fn(pt.shifted(a, h)) - fn(pt.shifted(a, -h))) / (2 * h) for a in range(4)])


def _inverse(g):
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError as e:
        raise InvalidArgumentError(f"Singular metric: {e}")


def christoffel_fd(p, pt, h_step=None, richardson=False):
    """Gamma[k, i, j] = Gamma^k_ij by central differences of the metric."""
    h = config.FD_STEP if h_step is None else h_step
    if h <= 0.0:
        raise InvalidArgumentError(f"Finite difference step must be positive, got {h}")
    if richardson:
        coarse = christoffel_fd(p, pt, h)
        fine = christoffel_fd(p, pt, h / 2)
        return (4.0 * fine - coarse) / 3.0
    g_inv = _inverse(metric_at(p, pt).g)
    dg = _central_difference(lambda q: metric_at(p, q).g, pt, h)
    lowered = np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", g_inv, lowered)


def riemann_coordinate_fd(p, pt, h_step=None):
    """R[a, b, c, d] = R^a_bcd, so that R(d_c, d_d) d_b = R^a_bcd d_a."""
    h = config.FD_STEP if h_step is None else h_step
    gamma = christoffel_fd(p, pt, h)
    dgamma = _central_difference(lambda q: christoffel_fd(p, q, h), pt, h)
    return (np.einsum("cadb->abcd", dgamma) - np.einsum("dacb->abcd", dgamma)
            + np.einsum("ace,edb->abcd", gamma, gamma) - np.einsum("ade,ecb->abcd", gamma, gamma))


def riemann_frame_fd(p, pt, h_step=None):
    """R[i, j, k, l] = <R(e_i, e_j) e_l, e_k>, the coefficient of e^ij in curvature entry (k, l)."""
    g = metric_at(p, pt).g
    frame = frame_at(p, pt)
    coord = riemann_coordinate_fd(p, pt, h_step)
    return np.einsum("am,mk,abcd,bl,ci,dj->ijkl", g, frame, coord, frame, frame, frame)


def closed_curvature_tensor(p, tau):
    """The same layout read off curvature_matrix(curvature_components(p, tau))."""
    matrix = curvature_matrix(curvature_components(p, tau))
    tensor = np.zeros((4, 4, 4, 4))
    for k, l in product(range(4), repeat=2):
        entry = matrix.entry(k, l)
        for i, j in product(range(4), repeat=2):
            if i < j:
                value = entry.coefficient(i + 1, j + 1)
                tensor[i, j, k, l] = value
                tensor[j, i, k, l] = -value
    return tensor


def three_vertical_indices(tensor):
    """Largest component with exactly three indices among e3, e4."""
    worst = 0.0
    for idx in product(range(4), repeat=4):
        if sum(1 for i in idx if i >= 2) == 3:
            worst = max(worst, abs(tensor[idx]))
    return worst


def symmetry_defect(tensor):
    pair = np.max(np.abs(tensor - np.transpose(tensor, (2, 3, 0, 1))))
    first = np.max(np.abs(tensor + np.transpose(tensor, (1, 0, 2, 3))))
    last = np.max(np.abs(tensor + np.transpose(tensor, (0, 1, 3, 2))))
    bianchi = np.max(np.abs(tensor + np.transpose(tensor, (1, 2, 0, 3)) + np.transpose(tensor, (2, 0, 1, 3))))
    return float(max(pair, first, last, bianchi))


def _covariant_frame_derivative(p, pt, h):
    # cov[b, i, k] = (nabla_{e_k} e_i)^b
    frame = frame_at(p, pt)
    gamma = christoffel_fd(p, pt, h)
    dframe = _central_difference(lambda q: frame_at(p, q), pt, h)
    return (np.einsum("ak,abi->bik", frame, dframe)
            + np.einsum("ak,bac,ci->bik", frame, gamma, frame))


def connection_frame_fd(p, pt, h_step=None):
    """nu[i, j, k] = g(nabla_{e_k} e_i, e_j)."""
    h = config.FD_STEP if h_step is None else h_step
    g = metric_at(p, pt).g
    frame = frame_at(p, pt)
    return np.einsum("bik,bm,mj->ijk", _covariant_frame_derivative(p, pt, h), g, frame)


def complex_structure_at(p, pt):
    """J e1 = e2, J e3 = e4 as a (1,1) tensor in chart components."""
    frame = frame_at(p, pt)
    image = np.stack([frame[:, 1], -frame[:, 0], frame[:, 3], -frame[:, 2]], axis=1)
    return image @ np.linalg.inv(frame)


def kahler_defect_fd(p, pt, h_step=None):
    """max |nabla J| in chart components."""
    h = config.FD_STEP if h_step is None else h_step
    j = complex_structure_at(p, pt)
    gamma = christoffel_fd(p, pt, h)
    dj = _central_difference(lambda q: complex_structure_at(p, q), pt, h)
    # (nabla_c J)^a_b = d_c J^a_b + Gamma^a_cd J^d_b - Gamma^d_cb J^a_d
    nabla = dj + np.einsum("acd,db->cab", gamma, j) - np.einsum("dcb,ad->cab", gamma, j)
    return float(np.max(np.abs(nabla)))


def gradient_flow_defect(p, pt, h_step=None):
    """Length of the part of nabla_v v orthogonal to v = grad tau."""
    h = config.FD_STEP if h_step is None else h_step

    def gradient(q):
        return _inverse(metric_at(p, q).g)[:, TAU]

    g = metric_at(p, pt).g
    v = gradient(pt)
    dv = _central_difference(gradient, pt, h)
    gamma = christoffel_fd(p, pt, h)
    accel = np.einsum("a,ab->b", v, dv) + np.einsum("bac,a,c->b", gamma, v, v)
    perp = accel - (accel @ g @ v) / (v @ g @ v) * v
    return float(np.sqrt(max(perp @ g @ perp, 0.0)))


def sample_points(p, count=None, seed=None):
    """Deterministic pseudo-random interior chart points."""
    count = config.ORACLE_POINTS if count is None else count
    rng = np.random.default_rng(config.ORACLE_SEED if seed is None else seed)
    lo = p.tau_min + config.ORACLE_MARGIN * abs(p.tau_min)
    taus = rng.uniform(lo, -0.05 * abs(p.tau_min), count)
    coords = rng.uniform(-1.0, 1.0, (count, 3))
    return [ChartPoint(float(t), *map(float, c)) for t, c in zip(taus, coords)]


def curvature_residual(p, pt, h_step=None):
    """Relative max deviation of the FD curvature from the closed one at a chart point."""
    fd = riemann_frame_fd(p, pt, h_step)
    closed = closed_curvature_tensor(p, pt.tau)
    return float(np.max(np.abs(fd - closed)) / max(1.0, np.max(np.abs(closed)))), fd


def chart_volume_integral(p, integrand, base_size=(1.0, 1.0), nodes=(16, 4, 4, 4), tau_interval=None):
    """Gauss-Legendre quadrature of integrand(tau) sqrt(det g) over tau, s, x and y."""
    lo, hi = p.tau_range if tau_interval is None else tau_interval
    bounds = [(lo, hi), (0.0, p.fiber_period), (0.0, base_size[0]), (0.0, base_size[1])]
    rules = []
    for (a, b), n in zip(bounds, nodes):
        x, w = leggauss(n)
        rules.append(((b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w))
    total = 0.0
    for (t, wt), (s, ws), (x, wx), (y, wy) in product(*(list(zip(*r)) for r in rules)):
        g = metric_at(p, ChartPoint(t, s, x, y)).g
        total += wt * ws * wx * wy * integrand(t) * np.sqrt(np.linalg.det(g))
    logging.info(f"Chart quadrature over {np.prod(nodes)} points: {total:.12g}")
    return total
