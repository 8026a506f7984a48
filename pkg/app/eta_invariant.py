import logging
from dataclasses import dataclass, field
from math import isfinite, pi, sqrt

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss

import config
from charforms import QuadratureSpec
from errors import DomainError, NumericalError, ProfileError, SingularInputError
from skr import (boundary_data, closed_tail_bound, curvature_components, derived_functions, l_form_closed,
                 l_form_eigen, l_form_generic, profile_sample_taus, sqrt_a_coeffs, transgression_integrand_closed,
                 transgression_pullback_closed, transgression_pullback_direct)

# Assembly of the equivariant eta invariant
#   eta = -(1/pi^2) (int_M L - int_dM TL) - sign(M)
# from the Fubini-reduced bulk integral and the boundary transgression.

LFORM_COLUMNS = ["tau", "alpha", "beta", "gamma", "delta", "L4"]
TRANSGRESSION_COLUMNS = ["t", "integrand_e123"]


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float = 0.0

    def to_dict(self):
        return {"value": _json_float(self.value), "error": _json_float(self.error)}


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "residual": _json_float(self.residual), "tolerance": self.tolerance,
                "passed": self.passed, "note": self.note}


@dataclass
class Report:
    command: str
    config: dict
    lform: pd.DataFrame = None
    transgression: pd.DataFrame = None
    boundary_tl3: dict = field(default_factory=dict)
    bulk: Estimate = None
    boundary: Estimate = None
    eta: Estimate = None
    checks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: dict(config.CHECK_TOLERANCES))

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def to_dict(self):
        data = {
            "command": self.command,
            "config": self.config,
            "checks": [check.to_dict() for check in self.checks],
            "passed": self.passed,
            "tolerances": self.tolerances,
        }
        if self.lform is not None:
            data["lform"] = _records(self.lform)
        if self.boundary_tl3:
            data["boundary_tl3"] = {key: (value.to_dict() if isinstance(value, Estimate) else _json_float(value))
                                    for key, value in self.boundary_tl3.items()}
        for key in ("bulk", "boundary", "eta"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value.to_dict()
        return data


def _json_float(value):
    value = float(value)
    return value if isfinite(value) else None


def _records(df):
    return [{key: _json_float(value) for key, value in row.items()} for row in df.to_dict(orient="records")]


def _panel_breakpoints(lo, hi, panels):
    # quadratic grading toward the critical end tau_min
    return lo + (hi - lo) * (np.arange(panels + 1) / panels) ** 2


def _panel_quadrature(fn, lo, hi, nodes, panels):
    x, w = leggauss(nodes)
    edges = _panel_breakpoints(lo, hi, panels)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half, mid = (b - a) / 2, (a + b) / 2
        for xi, wi in zip(x, w):
            total += half * wi * fn(mid + half * xi)
    return total


def _q_positive(p, tau):
    try:
        derived_functions(p, tau)
    except ProfileError:
        return False
    return True


def tau_integral(p, fn, nodes=None, panels=None):
    """int_{tau_min}^0 fn(tau) dtau with an error estimate."""
    nodes = config.QUADRATURE_NODES if nodes is None else nodes
    panels = config.TAU_PANELS if panels is None else panels
    coarse_panels = max(panels // 2, 1)
    if _q_positive(p, p.tau_min):
        fine = _panel_quadrature(fn, p.tau_min, 0.0, nodes, panels)
        coarse = _panel_quadrature(fn, p.tau_min, 0.0, nodes, coarse_panels)
        return Estimate(fine, abs(fine - coarse))

    # Q vanishes at tau_min: integrate from tau_min + eps and extrapolate linearly in eps
    ladder = config.EPSILON_LADDER
    values = [_panel_quadrature(fn, p.tau_min + eps, 0.0, nodes, panels) for eps in ladder]
    increments = [abs(b - a) for a, b in zip(values[:-1], values[1:])]
    logging.info(f"Endpoint ladder eps={list(ladder)} values={values} increments={increments}")
    if increments[-1] > increments[0] and increments[-1] > 1e-14 * max(1.0, abs(values[-1])):
        raise NumericalError(
            f"Integral does not settle as eps -> 0 at tau_min = {p.tau_min}: increments {increments}")
    extrapolated = [(e1 * v2 - e2 * v1) / (e1 - e2)
                    for (e1, v1), (e2, v2) in zip(zip(ladder[:-1], values[:-1]), zip(ladder[1:], values[1:]))]
    return Estimate(extrapolated[-1], abs(extrapolated[-1] - extrapolated[0]))


def reduced_volume_integral(p, integrand, nodes=None, panels=None):
    """fiber_period * base_area * int integrand(tau) w(tau) dtau: the volume integral of a function of tau."""
    inner = tau_integral(p, lambda tau: integrand(tau) * p.volume_weight(tau), nodes, panels)
    scale = p.fiber_period * p.base_area
    return Estimate(scale * inner.value, scale * inner.error)


def l_form_degree4(p, tau, order=None):
    try:
        return l_form_generic(p, tau, order).top
    except DomainError as e:
        logging.warning(f"Generic L-form outside its series radius at tau = {tau:.6g} ({e}); using eigen-angles")
        return l_form_eigen(p, tau).top


def _optional(fn, *args):
    try:
        return fn(*args)
    except (SingularInputError, DomainError):
        return None


def lform_table(cfg, samples=None):
    """L-form data on interior tau samples: sqrt(A) coefficients and L4 from three routes."""
    p = cfg.profile
    rows = []
    for tau in profile_sample_taus(p, config.LFORM_SAMPLES if samples is None else samples):
        tau = float(tau)
        df = derived_functions(p, tau)
        coeffs = _optional(sqrt_a_coeffs, df.phi, df.psi, curvature_components(p, tau)) or (np.nan,) * 4
        closed = _optional(l_form_closed, p, tau)
        eigen = _optional(l_form_eigen, p, tau)
        rows.append({
            "tau": tau,
            "alpha": coeffs[0], "beta": coeffs[1], "gamma": coeffs[2], "delta": coeffs[3],
            "L4": l_form_degree4(p, tau, cfg.numerics.series_order),
            "L4_closed": closed.top if closed is not None else np.nan,
            "L4_eigen": eigen.top if eigen is not None else np.nan,
        })
    logging.info(f"L-form table with {len(rows)} samples")
    return pd.DataFrame(rows, columns=LFORM_COLUMNS + ["L4_closed", "L4_eigen"])


def transgression_table(cfg):
    quad = QuadratureSpec(cfg.numerics.quadrature_nodes)
    bd = boundary_data(cfg.profile)
    nodes, _ = quad.points()
    rows = [{"t": float(t), "integrand_e123": transgression_integrand_closed(bd, float(t), cfg.numerics.series_order)}
            for t in nodes]
    return pd.DataFrame(rows, columns=TRANSGRESSION_COLUMNS)


def boundary_transgression(cfg):
    """TL3 coefficient of e123 from both routes; the generic route is the reported value."""
    p = cfg.profile
    quad = QuadratureSpec(cfg.numerics.quadrature_nodes)
    order = cfg.numerics.series_order
    closed = transgression_pullback_closed(p, order, quad)
    direct = transgression_pullback_direct(p, order, quad)
    discrepancy = abs(closed.top - direct.top)
    logging.info(f"Boundary TL3: closed={closed.top:.17g} direct={direct.top:.17g} discrepancy={discrepancy:.3e}")
    return {
        "closed": Estimate(closed.top, closed.tail_bound),
        "direct": Estimate(direct.top, discrepancy + closed_tail_bound(p, order)),
        "discrepancy": discrepancy,
    }


def assemble_eta(bulk, boundary, signature):
    """-(1/pi^2)(bulk - boundary) - sign(M)."""
    value = -(bulk.value - boundary.value) / pi ** 2 - signature
    return Estimate(value, (bulk.error + boundary.error) / pi ** 2)


def eta_invariant(cfg):
    p = cfg.profile
    numerics = cfg.numerics
    report = Report("eta", cfg.echo())

    # Step 1: L-form samples and bulk integral
    report.lform = lform_table(cfg)
    report.bulk = reduced_volume_integral(
        p, lambda tau: l_form_degree4(p, tau, numerics.series_order), nodes=numerics.quadrature_nodes)
    logging.info(f"Bulk integral {report.bulk.value:.17g} +- {report.bulk.error:.3e}")

    # Step 2: boundary transgression times the boundary volume
    report.boundary_tl3 = boundary_transgression(cfg)
    report.transgression = transgression_table(cfg)
    tl3 = report.boundary_tl3["direct"]
    volume = p.volume_weight(0.0) * p.base_area * p.fiber_period * sqrt(derived_functions(p, 0.0).q)
    report.boundary = Estimate(tl3.value * volume, tl3.error * volume)

    # Step 3: eta
    report.eta = assemble_eta(report.bulk, report.boundary, cfg.signature)
    logging.info(f"eta = {report.eta.value:.17g} +- {report.eta.error:.3e}")
    return report


def lform_report(cfg):
    report = Report("lform", cfg.echo())
    report.lform = lform_table(cfg)
    return report


def transgression_report(cfg):
    report = Report("transgression", cfg.echo())
    report.boundary_tl3 = boundary_transgression(cfg)
    report.transgression = transgression_table(cfg)
    return report
