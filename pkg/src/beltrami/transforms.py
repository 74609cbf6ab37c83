"""Discrete Cauchy and Beurling transforms on a zero-padded grid.

``C h(z) = (1/pi) \\int h(w) / (z - w) dm(w)`` is a linear convolution of the
cell-averaged density with the kernel ``1/(pi z)``; kernel cells near the
singularity are integrated in closed form, farther cells use the midpoint
value (the kernel is harmonic, so the midpoint rule is fourth-order there).

``S h = d/dz C h`` is applied in frequency space with the unit-modulus
multiplier ``conj(xi) / xi`` on the padded torus. That multiplier annihilates
the mean, so the zero mode of ``h`` is carried separately by a Gaussian
whose Beurling transform is known in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import InvalidArgument, SupportOverflow
from .grid import ComplexField, GridSpec

MARGIN_FRACTION = 0.10


def _cell_integral_inv(x1, x2, y1, y2):
    """Exact ``\\int\\int_{[x1,x2]x[y1,y2]} dm(u) / u`` (corners must avoid the origin)."""

    def f_re(x, y):
        r2 = x * x + y * y
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(x == 0, 0.0, x * np.arctan(y / np.where(x == 0, 1, x)))
        return 0.5 * y * np.log(r2) + t

    def f_im(x, y):
        r2 = x * x + y * y
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(y == 0, 0.0, y * np.arctan(x / np.where(y == 0, 1, y)))
        return 0.5 * x * np.log(r2) + t

    def corners(F):
        return F(x2, y2) - F(x1, y2) - F(x2, y1) + F(x1, y1)

    return corners(f_re) - 1j * corners(f_im)


def cauchy_kernel(spec: GridSpec, padded_size: int, near: int = 3) -> np.ndarray:
    """Wrapped kernel ``(1/pi) \\int_cell du / u`` at every lattice offset of the padded grid."""
    h = spec.spacing
    p = padded_size
    a = np.fft.fftfreq(p, 1.0 / p)  # integer offsets in wrap-around order
    A, B = np.meshgrid(a, a, indexing="ij")
    d = (A + 1j * B) * h
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(d == 0, 0, h * h / np.where(d == 0, 1, d))
    sel = (np.abs(A) <= near) & (np.abs(B) <= near)
    Ax, Bx = A[sel] * h, B[sel] * h
    k[sel] = _cell_integral_inv(Ax - h / 2, Ax + h / 2, Bx - h / 2, Bx + h / 2)
    return k / np.pi


def _gaussian_reference(spec: GridSpec):
    """Unit-mass Gaussian on the grid and its exact Beurling transform at the nodes."""
    s = spec.halfwidth / 4
    z = spec.nodes() - spec.center
    r2 = np.abs(z) ** 2
    g = np.exp(-r2 / (s * s)) / (np.pi * s * s)
    # radial density: S h = h(r) conj(z)/z - M(r) / (pi z^2), M(r) = mass inside radius r
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.exp(-r2 / (s * s))
        sg = (e * np.conj(z) / z - s * s * (-np.expm1(-r2 / (s * s))) / z**2) / (np.pi * s * s)
    small = r2 < (1e-4 * s) ** 2
    sg = np.where(small, -np.conj(z) ** 2 / (2 * np.pi * s**4), sg)
    mass = g.sum() * spec.cell_area
    return g / mass, sg / mass


@dataclass(frozen=True, eq=False)
class TransformPlan:
    spec: GridSpec
    padded_size: int
    cauchy_hat: np.ndarray = field(repr=False)
    beurling_multiplier: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)
    reference_beurling: np.ndarray = field(repr=False)
    workers: int | None = None

    def pad(self, values: np.ndarray) -> np.ndarray:
        n = self.spec.resolution
        out = np.zeros((self.padded_size, self.padded_size), dtype=complex)
        out[:n, :n] = values
        return out


def make_plan(spec: GridSpec, padding: int = 2, near: int = 3, workers: int | None = None) -> TransformPlan:
    """Precompute the kernels for ``spec``; ``padding`` is the padded/grid size ratio (>= 2)."""
    if padding < 2 or padding & (padding - 1):
        raise InvalidArgument("padding must be a power of two >= 2")
    p = padding * spec.resolution
    kernel = cauchy_kernel(spec, p, near)
    chat = sfft.fft2(kernel, workers=workers)
    xi = 2 * np.pi * sfft.fftfreq(p, spec.spacing)
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    xic = X1 + 1j * X2
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = np.where(xic == 0, 0, np.conj(xic) / np.where(xic == 0, 1, xic))
    ref, sref = _gaussian_reference(spec)
    return TransformPlan(spec, p, chat, mult, ref, sref, workers)


def _check_support(h: ComplexField, plan: TransformPlan) -> np.ndarray:
    if h.spec != plan.spec:
        raise InvalidArgument("density and plan are on different grids")
    vals = h.values
    m = max(1, int(np.ceil(MARGIN_FRACTION * plan.spec.resolution)))
    ring = np.ones(vals.shape, dtype=bool)
    ring[m:-m, m:-m] = False
    if np.any(vals[ring] != 0):
        raise SupportOverflow("density is nonzero on the outer 10% margin of the window")
    return vals


def cauchy_array(values: np.ndarray, plan: TransformPlan) -> np.ndarray:
    n = plan.spec.resolution
    hat = sfft.fft2(plan.pad(values), workers=plan.workers)
    return sfft.ifft2(hat * plan.cauchy_hat, workers=plan.workers)[:n, :n]


def beurling_array(values: np.ndarray, plan: TransformPlan, return_padded: bool = False) -> np.ndarray:
    n = plan.spec.resolution
    mass = values.sum() * plan.spec.cell_area
    zero_mean = values - mass * plan.reference if mass != 0 else values
    hat = sfft.fft2(plan.pad(zero_mean), workers=plan.workers)
    out = sfft.ifft2(hat * plan.beurling_multiplier, workers=plan.workers)
    if mass != 0:
        out[:n, :n] += mass * plan.reference_beurling
    return out if return_padded else out[:n, :n]


def cauchy_transform(h: ComplexField, plan: TransformPlan) -> ComplexField:
    """``C h`` on the grid; ``d/dzbar C h = h`` and ``C h -> 0`` at infinity."""
    vals = _check_support(h, plan)
    return ComplexField(plan.spec, cauchy_array(vals, plan), "displacement")


def beurling_transform(h: ComplexField, plan: TransformPlan) -> ComplexField:
    """``S h`` on the grid (principal value, zero frequency mapped to zero)."""
    vals = _check_support(h, plan)
    return ComplexField(plan.spec, beurling_array(vals, plan), "derivative")
