"""Closed-form radial example: coefficient, solutions, inverses and dilatations.

The coefficient lives on the annulus ``1/2 < |z| < 1``::

    mu(z) = e^{2 i theta} (2r - a(2r - 1)) / (2r + a(2r - 1))

with exponent ``a = alpha``. Its solution collapses the disk ``|z| <= 1/2``
to the origin. Truncating at dilatation level ``k > 1/alpha`` keeps ``mu``
only on ``rho(k) <= |z| < 1`` with ``rho(k) = k alpha / (2 (k alpha - 1))``
and yields a homeomorphism ``f_k`` that is linear on ``|z| <= rho(k)``, radial
on the annulus and the identity for ``|z| >= 1``.

Every formula is evaluated in polar form and vectorises over numpy arrays.
Points on a branch circle take the outer branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNode, InvalidArgument


@dataclass(frozen=True)
class ExampleParams:
    alpha: float
    k: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgument(f"alpha must be positive, got {self.alpha}")
        if not self.k * self.alpha > 1:
            raise InvalidArgument(f"need k > 1/alpha, got k={self.k}, alpha={self.alpha}")

    @property
    def rho(self) -> float:
        """Radius below which the coefficient is truncated away."""
        ka = self.k * self.alpha
        return 0.5 * ka / (ka - 1)

    @property
    def fully_truncated(self) -> bool:
        # rho >= 1: K_mu > k on the whole annulus, so mu_k = 0 and f_k is the identity
        return self.rho >= 1

    @property
    def image_radius(self) -> float:
        """``f_k(rho)``, the branch radius of the inverse."""
        if self.fully_truncated:
            return 1.0
        return (1.0 / (self.k * self.alpha - 1)) ** (1.0 / self.alpha)


def _polar(z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r > 0, z / np.where(r > 0, r, 1), 1.0)
    return z, r, unit


def mu_example(z, alpha: float):
    z, r, unit = _polar(z)
    ring = (r > 0.5) & (r < 1)
    t = alpha * (2 * r - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = unit**2 * (2 * r - t) / (2 * r + t)
    return np.where(ring, val, 0j)


def mu_k_example(z, params: ExampleParams):
    z, r, _ = _polar(z)
    if params.fully_truncated:
        return np.zeros_like(z)
    keep = (r >= params.rho) & (r < 1)
    return np.where(keep, mu_example(z, params.alpha), 0j)


def f_example(z, alpha: float):
    """The non-injective limit map (identity outside the unit disk)."""
    z, r, unit = _polar(z)
    with np.errstate(invalid="ignore"):
        ring = unit * np.clip(2 * r - 1, 0, None) ** (1 / alpha)
    return np.where(r >= 1, z, np.where(r > 0.5, ring, 0j))


def f_k_example(z, params: ExampleParams):
    z, r, unit = _polar(z)
    if params.fully_truncated:
        return z.copy()
    a, rho = params.alpha, params.rho
    outer = unit * np.clip(2 * r - 1, 0, None) ** (1 / a)
    inner = z * (params.image_radius / rho)
    return np.where(r >= 1, z, np.where(r >= rho, outer, inner))


def g_k_example(y, params: ExampleParams):
    """Inverse of :func:`f_k_example`."""
    y, s, unit = _polar(y)
    if params.fully_truncated:
        return y.copy()
    a, s0 = params.alpha, params.image_radius
    outer = unit * (s**a + 1) / 2
    inner = y * (params.rho / s0)
    return np.where(s >= 1, y, np.where(s >= s0, outer, inner))


def K_mu_example(z, alpha: float):
    _, r, _ = _polar(z)
    ring = (r > 0.5) & (r < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 2 * r / (alpha * (2 * r - 1))
    return np.where(ring, val, 1.0)


def K_mu_k_example(z, params: ExampleParams):
    _, r, _ = _polar(z)
    if params.fully_truncated:
        return np.ones_like(r)
    keep = (r >= params.rho) & (r < 1)
    return np.where(keep, K_mu_example(z, params.alpha), 1.0)


def Q_example(y, alpha: float):
    """Majorant ``(|y|^a + 1) / (a |y|^a)`` on the unit disk, 1 outside (``+inf`` at 0)."""
    _, s, _ = _polar(y)
    with np.errstate(divide="ignore"):
        val = (s**alpha + 1) / (alpha * s**alpha)
    return np.where(s < 1, val, 1.0)


def K_inverse_example(y, params: ExampleParams):
    """Maximal dilatation of ``g_k``: equal to the majorant on its outer branch, 1 inside."""
    _, s, _ = _polar(y)
    if params.fully_truncated:
        return np.ones_like(s)
    keep = (s >= params.image_radius) & (s < 1)
    return np.where(keep, Q_example(y, params.alpha), 1.0)


def mu_from_polar(f, z, step: float = 1e-5) -> complex:
    """Complex dilatation from the polar ratio ``e^{2i theta}(r f_r + i f_theta)/(r f_r - i f_theta)``.

    Radial and angular derivatives are taken by central differences of size
    ``step`` (relative in ``r``).
    """
    z = complex(z)
    if z == 0:
        raise InvalidArgument("polar derivatives are undefined at the origin")
    r, th = abs(z), np.angle(z)
    dr = step * r
    f_r = (f(z * (r + dr) / r) - f(z * (r - dr) / r)) / (2 * dr)
    f_t = (f(r * np.exp(1j * (th + step))) - f(r * np.exp(1j * (th - step)))) / (2 * step)
    num = r * f_r + 1j * f_t
    den = r * f_r - 1j * f_t
    if abs(den) <= abs(num):
        raise DegenerateNode(f"map is not sense-preserving at {z}")
    return complex(np.exp(2j * th) * num / den)
