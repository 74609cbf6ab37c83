"""Dilatation functionals of inverse maps and the change-of-variables identity.

For an inverse ``g`` with derivatives ``g_w``, ``g_wbar``::

    K_mu_g  = (|g_w|^2 - |g_wbar|^2) / (|g_w| - |g_wbar|)^2
    K_I,p   = (|g_w|^2 - |g_wbar|^2) / (|g_w| - |g_wbar|)^p,    1 < p <= 2
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNode, InvalidArgument
from .grid import ComplexField
from .regions import Disk, cell_weights, polygon_cell_weights
from .solver import SampledMap

LOW_CONFIDENCE_FRACTION = 0.01


class LowConfidenceWarning(UserWarning):
    """More than 1% of the nodes in an integration region were excluded as degenerate."""


def _check_p(p):
    if not (1 < p <= 2):
        raise InvalidArgument(f"p must lie in (1, 2], got {p}")


def _moduli(g_w, g_wbar):
    a = np.abs(np.asarray(g_w, dtype=complex))
    b = np.abs(np.asarray(g_wbar, dtype=complex))
    if np.any(~(a > b)):
        raise DegenerateNode("|g_w| <= |g_wbar|: degenerate or sense-reversing node")
    return a, b


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def k_mu_g(g_w, g_wbar):
    a, b = _moduli(g_w, g_wbar)
    return _scalar((a * a - b * b) / (a - b) ** 2)


def k_inner_p(g_w, g_wbar, p: float):
    _check_p(p)
    a, b = _moduli(g_w, g_wbar)
    return _scalar((a * a - b * b) / (a - b) ** p)


def inner_p_field(g: SampledMap, p: float) -> tuple[np.ndarray, np.ndarray]:
    """``K_I,p`` at every node of ``g`` and the mask of degenerate nodes (set to NaN)."""
    _check_p(p)
    a = np.abs(g.f_z.values)
    b = np.abs(g.f_zbar.values)
    bad = ~(a > b) | ~np.isfinite(a) | ~np.isfinite(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (a * a - b * b) / (a - b) ** p
    return np.where(bad, np.nan, k), bad


def _weighted_sum(values, weights, bad, area):
    used = weights > 0
    n_bad = int((bad & used).sum())
    total = float(np.sum(np.where(bad, 0.0, values * weights)) * area)
    frac = n_bad / max(int(used.sum()), 1)
    if frac > LOW_CONFIDENCE_FRACTION:
        warnings.warn(f"{n_bad} degenerate nodes ({frac:.1%}) excluded from quadrature", LowConfidenceWarning, stacklevel=3)
    return total, n_bad


def integral_inner_p(g: SampledMap, region, p: float) -> float:
    """Midpoint quadrature of ``K_I,p(w, g)`` over ``region`` (Disk, Box or GridSpec window).

    Cells are weighted by the fraction of their area inside the region;
    degenerate nodes are dropped (with a :class:`LowConfidenceWarning` above 1%).
    """
    vals, bad = inner_p_field(g, p)
    w = cell_weights(g.spec, region)
    total, _ = _weighted_sum(vals, w, bad, g.spec.cell_area)
    return total


@dataclass(frozen=True)
class DilatationReport:
    K_mu_g: ComplexField
    K_I_p: ComplexField
    p: float
    integral_K_I_p: float
    flagged_nodes: int

    def to_dict(self) -> dict:
        k = self.K_I_p.values.real
        fin = k[np.isfinite(k)]
        return {
            "p": self.p,
            "integral": self.integral_K_I_p,
            "flagged": self.flagged_nodes,
            "min": float(fin.min()) if fin.size else None,
            "max": float(fin.max()) if fin.size else None,
        }


def dilatation_report(g: SampledMap, region, p: float) -> DilatationReport:
    kp, bad = inner_p_field(g, p)
    k2, _ = inner_p_field(g, 2)
    w = cell_weights(g.spec, region)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowConfidenceWarning)
        total, n_bad = _weighted_sum(kp, w, bad, g.spec.cell_area)
    return DilatationReport(
        ComplexField(g.spec, np.where(bad, np.inf, k2), "scalar"),
        ComplexField(g.spec, np.where(bad, np.inf, kp), "scalar"),
        p,
        total,
        n_bad,
    )


def change_of_variables_check(f: SampledMap, g: SampledMap, C: Disk, p: float, boundary_points: int | None = None):
    """Compare ``\\int_C ||f'||^p dm`` with ``\\int_{f(C)} K_I,p(w, g) dm(w)``.

    ``||f'|| = |f_z| + |f_zbar|``. Both regions are represented by polygons:
    the boundary of ``C`` and its image under the interpolated ``f``, with
    vertex spacing below one cell; each grid cell is weighted by its exact
    overlap with the polygon. Returns ``(lhs, rhs, rel_gap)``.
    """
    _check_p(p)
    if not C.inside_window(f.spec):
        raise InvalidArgument("region C must lie inside the grid of f")
    h = min(f.spec.spacing, g.spec.spacing)
    n = boundary_points or max(8192, int(np.ceil(2 * np.pi * C.radius / (0.25 * h))))
    ring = C.boundary(n)
    image = f(ring)
    if not np.all(np.isfinite(image)):
        raise InvalidArgument("f(C) could not be evaluated on the grid of f")
    if not np.all(g.spec.contains(image, margin=g.spec.spacing)):
        raise InvalidArgument("f(C) exceeds the grid of g")

    norm = (np.abs(f.f_z.values) + np.abs(f.f_zbar.values)) ** p
    w_f = polygon_cell_weights(f.spec, ring)
    lhs = float(np.sum(norm * w_f) * f.spec.cell_area)

    kp, bad = inner_p_field(g, p)
    w_g = polygon_cell_weights(g.spec, image)
    rhs, _ = _weighted_sum(kp, w_g, bad, g.spec.cell_area)
    rel_gap = abs(lhs - rhs) / max(lhs, rhs)
    return lhs, rhs, rel_gap

