"""Planar regions and the fraction of each grid cell they cover.

Quadratures in this package are midpoint sums ``sum(w_ij * F_ij) * h**2``
whose weights ``w_ij`` are the exact covered fraction of cell ``(i, j)``,
so a constant integrand is integrated without rasterisation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely

from .errors import InvalidArgument
from .grid import GridSpec


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgument(f"disk radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def area(self) -> float:
        return np.pi * self.radius**2

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def boundary(self, n: int) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * t)

    def inside_window(self, spec: GridSpec) -> bool:
        c = self.center - spec.center
        return (abs(c.real) + self.radius <= spec.halfwidth) and (abs(c.imag) + self.radius <= spec.halfwidth)


@dataclass(frozen=True)
class Box:
    """Axis-aligned square ``|Re(z - c)| <= halfwidth, |Im(z - c)| <= halfwidth``."""

    center: complex
    halfwidth: float

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise InvalidArgument("box halfwidth must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def area(self) -> float:
        return 4 * self.halfwidth**2

    def contains(self, z) -> np.ndarray:
        d = np.asarray(z) - self.center
        return (np.abs(d.real) <= self.halfwidth) & (np.abs(d.imag) <= self.halfwidth)

    def inside_window(self, spec: GridSpec) -> bool:
        c = self.center - spec.center
        return max(abs(c.real), abs(c.imag)) + self.halfwidth <= spec.halfwidth * (1 + 1e-12)


def _cell_edges(spec: GridSpec):
    x, y = spec.axis()
    h = spec.spacing
    return x - h / 2, x + h / 2, y - h / 2, y + h / 2


def _quadrant_area(x, y, r):
    # signed area of [0, x] x [0, y] inside the disk |w| < r (odd in x and in y)
    sx, sy = np.sign(x), np.sign(y)
    x = np.minimum(np.abs(x), r)
    y = np.minimum(np.abs(y), r)
    x0 = np.sqrt(np.maximum(r * r - y * y, 0.0))

    def arc(t):
        return 0.5 * (t * np.sqrt(np.maximum(r * r - t * t, 0.0)) + r * r * np.arcsin(np.clip(t / r, -1, 1)))

    area = np.where(x <= x0, x * y, x0 * y + arc(x) - arc(x0))
    return sx * sy * area


def disk_cell_weights(spec: GridSpec, disk: Disk) -> np.ndarray:
    """Exact covered fraction of every cell by ``disk``."""
    x1, x2, y1, y2 = _cell_edges(spec)
    cx, cy = disk.center.real, disk.center.imag
    X1, X2 = (x1 - cx)[:, None], (x2 - cx)[:, None]
    Y1, Y2 = (y1 - cy)[None, :], (y2 - cy)[None, :]
    r = disk.radius
    a = _quadrant_area(X2, Y2, r) - _quadrant_area(X1, Y2, r) - _quadrant_area(X2, Y1, r) + _quadrant_area(X1, Y1, r)
    return np.clip(a / spec.cell_area, 0.0, 1.0)


def box_cell_weights(spec: GridSpec, box: Box) -> np.ndarray:
    x1, x2, y1, y2 = _cell_edges(spec)
    bx1, bx2 = box.center.real - box.halfwidth, box.center.real + box.halfwidth
    by1, by2 = box.center.imag - box.halfwidth, box.center.imag + box.halfwidth
    wx = np.clip(np.minimum(x2, bx2) - np.maximum(x1, bx1), 0, None)
    wy = np.clip(np.minimum(y2, by2) - np.maximum(y1, by1), 0, None)
    return np.outer(wx, wy) / spec.cell_area


def polygon_cell_weights(spec: GridSpec, vertices) -> np.ndarray:
    """Covered fraction of every cell by the simple polygon through ``vertices``.

    Cells whose centre lies inside count fully unless they are crossed by the
    polygon edge, in which case the exact clipped area is computed. Edges are
    subdivided below half a cell so that the crossed cells are exactly those
    touched by a boundary point or its eight neighbours.
    """
    vertices = np.asarray(vertices, dtype=complex)
    poly = shapely.Polygon(np.column_stack([vertices.real, vertices.imag]))
    if not poly.is_valid:
        raise InvalidArgument("boundary polygon is self-intersecting")
    z = spec.nodes()
    w = shapely.contains_xy(poly, z.real, z.imag).astype(float)

    n, h = spec.resolution, spec.spacing
    ring = np.asarray(shapely.segmentize(poly, 0.5 * h).exterior.coords)
    vertices = ring[:, 0] + 1j * ring[:, 1]
    iu = np.floor((vertices.real - spec.center.real + spec.halfwidth) / h).astype(np.intp)
    iv = np.floor((vertices.imag - spec.center.imag + spec.halfwidth) / h).astype(np.intp)
    touched = np.zeros(spec.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            a, b = iu + di, iv + dj
            ok = (a >= 0) & (a < n) & (b >= 0) & (b < n)
            touched[a[ok], b[ok]] = True
    ii, jj = np.nonzero(touched)
    x1, x2, y1, y2 = _cell_edges(spec)
    boxes = shapely.box(x1[ii], y1[jj], x2[ii], y2[jj])
    w[ii, jj] = shapely.area(shapely.intersection(boxes, poly)) / spec.cell_area
    return w


def cell_weights(spec: GridSpec, region) -> np.ndarray:
    if isinstance(region, Disk):
        return disk_cell_weights(spec, region)
    if isinstance(region, Box):
        return box_cell_weights(spec, region)
    if isinstance(region, GridSpec):
        return box_cell_weights(spec, Box(region.center, region.halfwidth))
    raise InvalidArgument(f"unsupported region {region!r}")
