"""Cell-centred sampling of the complex plane and finite-difference Wirtinger calculus.

Node ``(i, j)`` of an ``N x N`` grid sits at::

    center + (-halfwidth + (i + 1/2) h) + 1j * (-halfwidth + (j + 1/2) h),   h = 2 halfwidth / N

so array axis 0 runs along ``x`` and axis 1 along ``y``. The origin of the
window is never a node, which keeps radially singular fields finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SamplingFailure

MEANINGS = ("coefficient", "displacement", "derivative", "scalar")


@dataclass(frozen=True)
class GridSpec:
    center: complex
    halfwidth: float
    resolution: int

    def __post_init__(self):
        n = self.resolution
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise InvalidArgument(f"resolution must be a power of two >= 8, got {n!r}")
        if not np.isfinite(self.halfwidth) or self.halfwidth <= 0:
            raise InvalidArgument(f"halfwidth must be positive, got {self.halfwidth!r}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "halfwidth", float(self.halfwidth))
        object.__setattr__(self, "resolution", int(n))

    @property
    def spacing(self) -> float:
        return 2.0 * self.halfwidth / self.resolution

    @property
    def shape(self) -> tuple[int, int]:
        return (self.resolution, self.resolution)

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    def axis(self) -> tuple[np.ndarray, np.ndarray]:
        """Node abscissae and ordinates (both length ``N``)."""
        offs = -self.halfwidth + (np.arange(self.resolution) + 0.5) * self.spacing
        return self.center.real + offs, self.center.imag + offs

    def node(self, i: int, j: int) -> complex:
        h = self.spacing
        return self.center + complex(-self.halfwidth + (i + 0.5) * h, -self.halfwidth + (j + 0.5) * h)

    def nodes(self) -> np.ndarray:
        x, y = self.axis()
        return x[:, None] + 1j * y[None, :]

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        """True where ``z`` lies inside the window shrunk by ``margin``."""
        z = np.asarray(z)
        lim = self.halfwidth - margin
        return (np.abs(z.real - self.center.real) <= lim) & (np.abs(z.imag - self.center.imag) <= lim)


def make_grid(center: complex, halfwidth: float, resolution: int) -> GridSpec:
    return GridSpec(center, halfwidth, resolution)


@dataclass(frozen=True)
class ComplexField:
    """Values sampled on the nodes of a :class:`GridSpec`.

    ``meaning`` is one of ``coefficient``, ``displacement``, ``derivative`` or
    ``scalar``; only scalar fields may hold non-finite entries (extended-real
    dilatations).
    """

    spec: GridSpec
    values: np.ndarray
    meaning: str = "scalar"

    def __post_init__(self):
        if self.meaning not in MEANINGS:
            raise InvalidArgument(f"unknown meaning tag {self.meaning!r}")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.spec.shape:
            raise InvalidArgument(f"values shape {vals.shape} does not match grid {self.spec.shape}")
        if self.meaning != "scalar" and not np.all(np.isfinite(vals)):
            raise InvalidArgument(f"non-finite entries in a {self.meaning} field")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def with_values(self, values, meaning: str | None = None) -> "ComplexField":
        return ComplexField(self.spec, values, meaning or self.meaning)

    def __call__(self, z) -> np.ndarray:
        return interpolate(self.values, self.spec, z)


def sample(fn, spec: GridSpec, meaning: str = "scalar") -> ComplexField:
    """Evaluate a vectorised pointwise function at every node."""
    z = spec.nodes()
    vals = np.broadcast_to(np.asarray(fn(z), dtype=complex), spec.shape)
    bad = ~np.isfinite(vals)
    if meaning != "scalar" and bad.any():
        idx = np.argwhere(bad)
        first = [complex(z[i, j]) for i, j in idx[:5]]
        raise SamplingFailure(f"{len(idx)} non-finite samples, first at {first}", nodes=first)
    return ComplexField(spec, vals, meaning)


def wirtinger_arrays(values: np.ndarray, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    fx, fy = np.gradient(values, spacing, edge_order=2)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def wirtinger(field: ComplexField) -> tuple[ComplexField, ComplexField]:
    """Return ``(f_z, f_zbar)`` by second-order central differences.

    One-sided second-order stencils are used on the boundary ring, so the
    result is exact (to roundoff) for affine maps ``a z + b conj(z) + c``.
    """
    fz, fzb = wirtinger_arrays(field.values, field.spec.spacing)
    return ComplexField(field.spec, fz, "derivative"), ComplexField(field.spec, fzb, "derivative")


def interpolate(values: np.ndarray, spec: GridSpec, z, outside=np.nan) -> np.ndarray:
    """Bilinear interpolation of node values at arbitrary points.

    Points within half a cell of the window edge are extrapolated linearly
    from the boundary cell; points further out receive ``outside``. A sample
    whose stencil touches a non-finite node is returned as ``+inf``.
    """
    z = np.asarray(z, dtype=complex)
    n = spec.resolution
    h = spec.spacing
    u = (z.real - spec.center.real + spec.halfwidth) / h - 0.5
    v = (z.imag - spec.center.imag + spec.halfwidth) / h - 0.5
    inside = (u >= -0.5) & (u <= n - 0.5) & (v >= -0.5) & (v <= n - 0.5)
    uf = np.where(inside, u, 0.0)
    vf = np.where(inside, v, 0.0)
    i0 = np.clip(np.floor(uf).astype(np.intp), 0, n - 2)
    j0 = np.clip(np.floor(vf).astype(np.intp), 0, n - 2)
    a = uf - i0
    b = vf - j0
    v00 = values[i0, j0]
    v10 = values[i0 + 1, j0]
    v01 = values[i0, j0 + 1]
    v11 = values[i0 + 1, j0 + 1]
    with np.errstate(invalid="ignore"):
        out = (1 - a) * (1 - b) * v00 + a * (1 - b) * v10 + (1 - a) * b * v01 + a * b * v11
    stencil_bad = ~(np.isfinite(v00) & np.isfinite(v10) & np.isfinite(v01) & np.isfinite(v11))
    if stencil_bad.any():
        out = np.where(stencil_bad, np.inf, out)
    return np.where(inside, out, outside)


def cell_jacobian_grid(spec: GridSpec, values: np.ndarray, z) -> tuple[np.ndarray, np.ndarray]:
    """Wirtinger derivatives of the bilinear interpolant of ``values`` at ``z``."""
    z = np.asarray(z, dtype=complex)
    n = spec.resolution
    h = spec.spacing
    u = (z.real - spec.center.real + spec.halfwidth) / h - 0.5
    v = (z.imag - spec.center.imag + spec.halfwidth) / h - 0.5
    i0 = np.clip(np.floor(u).astype(np.intp), 0, n - 2)
    j0 = np.clip(np.floor(v).astype(np.intp), 0, n - 2)
    a = np.clip(u - i0, 0.0, 1.0)
    b = np.clip(v - j0, 0.0, 1.0)
    v00 = values[i0, j0]
    v10 = values[i0 + 1, j0]
    v01 = values[i0, j0 + 1]
    v11 = values[i0 + 1, j0 + 1]
    fx = ((1 - b) * (v10 - v00) + b * (v11 - v01)) / h
    fy = ((1 - a) * (v01 - v00) + a * (v11 - v10)) / h
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
