"""Principal solutions ``f = z + C h`` of the two-characteristic Beltrami equation.

The density ``h = f_zbar`` is the fixed point of::

    h = mu + nu + mu * S h + nu * conj(S h)

which is a contraction in L2 with factor ``ess sup(|mu| + |nu|)`` because the
Beurling transform ``S`` is an isometry. Then ``f_z = 1 + S h`` and
``f(z) - z = C h(z) -> 0`` as ``z -> infinity`` (hydrodynamic normalisation).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .coefficients import CoefficientField, TruncationLevel, truncate
from .errors import InvalidArgument, NoConvergence, SolverDivergence
from .grid import ComplexField, GridSpec, cell_jacobian_grid, interpolate, sample, wirtinger_arrays
from .regions import Disk
from .transforms import TransformPlan, beurling_array, cauchy_array, _check_support

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampledMap:
    """A planar map stored as its displacement ``f(z) - z`` plus Wirtinger derivatives."""

    spec: GridSpec
    displacement: ComplexField
    f_z: ComplexField
    f_zbar: ComplexField
    level: TruncationLevel | None = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, fn, spec: GridSpec, level=None, **diagnostics) -> "SampledMap":
        """Sample a vectorised map and differentiate it by finite differences."""
        z = spec.nodes()
        vals = np.asarray(fn(z), dtype=complex)
        fz, fzb = wirtinger_arrays(vals, spec.spacing)
        return cls(
            spec,
            ComplexField(spec, vals - z, "displacement"),
            ComplexField(spec, fz, "derivative"),
            ComplexField(spec, fzb, "derivative"),
            level,
            dict(diagnostics),
        )

    @classmethod
    def identity(cls, spec: GridSpec, level=None) -> "SampledMap":
        return cls.from_function(lambda z: z, spec, level)

    @property
    def values(self) -> np.ndarray:
        return self.spec.nodes() + self.displacement.values

    @property
    def jacobian(self) -> np.ndarray:
        return np.abs(self.f_z.values) ** 2 - np.abs(self.f_zbar.values) ** 2

    @property
    def flagged(self) -> np.ndarray:
        """Nodes where the map is not (numerically) sense-preserving."""
        return ~(self.jacobian > 0)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z + interpolate(self.displacement.values, self.spec, z)

    def derivatives_at(self, z) -> tuple[np.ndarray, np.ndarray]:
        return interpolate(self.f_z.values, self.spec, z), interpolate(self.f_zbar.values, self.spec, z)

    @cached_property
    def _image_tree(self) -> cKDTree:
        w = self.values.ravel()
        return cKDTree(np.column_stack([w.real, w.imag]))


@dataclass(frozen=True, eq=False)
class TruncationLadder:
    levels: list
    solutions: list
    inverses: list
    cauchy_gaps: list
    window: Disk

    @property
    def limit(self) -> SampledMap:
        """Highest computed level, the representative of the locally uniform limit."""
        return self.solutions[-1]


def _norm(a: np.ndarray, area: float) -> float:
    return float(np.sqrt(np.sum(np.abs(a) ** 2) * area))


def solve_principal(
    coeff: CoefficientField,
    plan: TransformPlan,
    tol: float = 1e-8,
    max_iter: int = 500,
    level=None,
) -> SampledMap:
    """Normalised homeomorphic solution of ``f_zbar = mu f_z + nu conj(f_z)``.

    Raises :class:`SolverDivergence` when the iteration gap ratio exceeds the
    contraction bound ``ess sup(|mu|+|nu|) + 0.05`` three times in a row and
    :class:`NoConvergence` after ``max_iter`` iterations.
    """
    if coeff.spec != plan.spec:
        raise InvalidArgument("coefficient and plan are on different grids")
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    _check_support(coeff.mu, plan)
    _check_support(coeff.nu, plan)
    mu, nu = coeff.mu.values, coeff.nu.values
    k = coeff.ess_sup
    if k >= 1:
        raise InvalidArgument(f"ess sup(|mu|+|nu|) = {k} is not < 1")
    area = plan.spec.cell_area

    h = np.zeros(plan.spec.shape, complex)
    s = np.zeros_like(h)
    ratios = []
    prev_gap = None
    strikes = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        h_new = mu + nu + mu * s + nu * np.conj(s)
        gap = _norm(h_new - h, area)
        ref = _norm(h, area)
        if prev_gap:
            ratios.append(gap / prev_gap)
            strikes = strikes + 1 if ratios[-1] > k + 0.05 else 0
            if strikes >= 3:
                raise SolverDivergence(
                    f"gap ratio {ratios[-1]:.4f} exceeded contraction bound {k:.4f} + 0.05 at iteration {it}"
                )
        h = h_new
        s = beurling_array(h, plan)
        prev_gap = gap
        if (ref == 0 and gap <= tol) or (ref > 0 and gap <= tol * ref):
            converged = True
            break

    fz = 1 + s
    res = h - mu * fz - nu * np.conj(fz)
    residual = _norm(res, area)
    rel = residual / _norm(fz, area)
    if not converged:
        raise NoConvergence(f"no convergence after {max_iter} iterations (residual {rel:.3e})", rel, it)
    log.debug("level %s converged in %d iterations, residual %.3e", level, it, rel)

    spec = plan.spec
    out = SampledMap(
        spec,
        ComplexField(spec, cauchy_array(h, plan), "displacement"),
        ComplexField(spec, fz, "derivative"),
        ComplexField(spec, h, "derivative"),
        level if level is None or isinstance(level, TruncationLevel) else TruncationLevel(level),
    )
    out.diagnostics.update(
        iterations=it,
        residual=residual,
        relative_residual=rel,
        gap_ratios=ratios,
        contraction_bound=k,
        flagged_nodes=int(out.flagged.sum()),
    )
    return out


def invert_map(f: SampledMap, targets, tol_inv: float = 1e-10, max_steps: int = 50) -> np.ndarray:
    """Solve ``f(z) = w`` for each target ``w`` by Newton's method.

    Seeds come from the grid node whose image is nearest to ``w``. The step
    uses the cached Wirtinger derivatives; points where that fails to reduce
    the residual switch to the exact derivative of the bilinear interpolant.
    Targets that leave the window or stagnate are returned as NaN.
    """
    w = np.asarray(targets, dtype=complex)
    shape = w.shape
    w = w.ravel()
    out = np.full(w.shape, np.nan + 0j)
    if w.size == 0:
        return out.reshape(shape)
    _, idx = f._image_tree.query(np.column_stack([w.real, w.imag]))
    z = f.spec.nodes().ravel()[idx]
    active = np.arange(w.size)
    exact = np.zeros(w.size, dtype=bool)
    r = w - f(z)
    for _ in range(max_steps + 1):
        ok = np.abs(r) <= tol_inv
        out[active[ok]] = z[ok]
        keep = ~ok & np.isfinite(r)
        active, z, r, exact = active[keep], z[keep], r[keep], exact[keep]
        if active.size == 0:
            break
        a, b = f.derivatives_at(z)
        if exact.any():
            ae, be = cell_jacobian_grid(f.spec, f.displacement.values, z[exact])
            a[exact], b[exact] = 1 + ae, be
        jac = np.abs(a) ** 2 - np.abs(b) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (np.conj(a) * r - b * np.conj(r)) / jac
        z_new = z + np.where(jac > 0, step, np.nan)
        r_new = w[active] - f(z_new)
        worse = ~(np.abs(r_new) < 0.5 * np.abs(r))
        exact = exact | worse
        z, r = z_new, r_new
    return out.reshape(shape)


def inverse_map(f: SampledMap, spec: GridSpec | None = None, tol_inv: float = 1e-10) -> SampledMap:
    """Sample ``g = f^{-1}`` on ``spec`` (default: the grid of ``f``).

    Derivatives come from the inverse function theorem applied to the cached
    derivatives of ``f``. Nodes outside the image of the window fall back to
    ``w - (f(w) - w)`` and are counted in ``diagnostics['inversion_failures']``.
    """
    spec = spec or f.spec
    w = spec.nodes()
    z = invert_map(f, w, tol_inv)
    failed = ~np.isfinite(z)
    if failed.any():
        fallback = w - interpolate(f.displacement.values, f.spec, w, outside=0)
        z = np.where(failed, fallback, z)
    a, b = f.derivatives_at(np.where(failed, w, z))
    jac = np.abs(a) ** 2 - np.abs(b) ** 2
    bad = failed | ~(jac > 0) | ~np.isfinite(jac)
    safe = np.where(bad, 1.0, jac)
    gw = np.conj(a) / safe
    gwb = -b / safe
    if bad.any():
        fdw, fdb = wirtinger_arrays(z, spec.spacing)
        gw = np.where(bad, fdw, gw)
        gwb = np.where(bad, fdb, gwb)
    return SampledMap(
        spec,
        ComplexField(spec, z - w, "displacement"),
        ComplexField(spec, gw, "derivative"),
        ComplexField(spec, gwb, "derivative"),
        f.level,
        {"inversion_failures": int(failed.sum())},
    )


def run_ladder(
    coeff: CoefficientField,
    levels,
    plan: TransformPlan,
    tol: float = 1e-8,
    max_iter: int = 500,
    window: Disk | None = None,
    invert: bool = True,
) -> TruncationLadder:
    """Solve the truncated equations for each level and record successive sup gaps on ``window``."""
    levels = [int(n) for n in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
        raise InvalidArgument(f"levels must be a nonempty increasing list of integers >= 1, got {levels}")
    spec = plan.spec
    window = window or Disk(spec.center, 0.8 * spec.halfwidth)
    mask = window.contains(spec.nodes())
    solutions, inverses, gaps = [], [], []
    for n in levels:
        lvl = TruncationLevel(n)
        try:
            f = solve_principal(truncate(coeff, lvl), plan, tol, max_iter, lvl)
        except (SolverDivergence, NoConvergence) as exc:
            exc.args = (f"level {n}: {exc.args[0]}",) + exc.args[1:]
            exc.level = n
            raise
        if solutions:
            gap = float(np.abs(f.values - solutions[-1].values)[mask].max())
            gaps.append(gap)
            f.diagnostics["cauchy_gap_prev"] = gap
        else:
            f.diagnostics["cauchy_gap_prev"] = None
        solutions.append(f)
        if invert:
            inverses.append(inverse_map(f))
    return TruncationLadder([TruncationLevel(n) for n in levels], solutions, inverses, gaps, window)


@dataclass(frozen=True)
class FarFieldProfile:
    radii: np.ndarray
    sup_errors: np.ndarray
    exponent: float


def far_field_profile(f: SampledMap, radii, samples: int = 720) -> FarFieldProfile:
    """``sup_{|z|=R} |f(z) - z|`` on each circle and the fitted decay exponent.

    The exponent is minus the least-squares slope of ``log sup_error`` against
    ``log R`` (NaN when fewer than two errors are positive).
    """
    radii = np.asarray(radii, dtype=float)
    reach = f.spec.halfwidth - 0.5 * f.spec.spacing
    offset = max(abs(f.spec.center.real), abs(f.spec.center.imag))
    if np.any(radii <= 0) or np.any(offset + radii > reach):
        raise InvalidArgument("far-field circles |z| = R must lie inside the window")
    theta = 2 * np.pi * np.arange(samples) / samples
    circle = np.exp(1j * theta)
    errs = np.array([np.abs(interpolate(f.displacement.values, f.spec, R * circle)).max() for R in radii])
    pos = errs > 0
    if pos.sum() >= 2:
        slope = np.polyfit(np.log(radii[pos]), np.log(errs[pos]), 1)[0]
        exponent = float(-slope)
    else:
        exponent = float("nan")
    return FarFieldProfile(radii, errs, exponent)
