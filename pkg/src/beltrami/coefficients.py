"""The coefficient pair (mu, nu) of ``f_zbar = mu f_z + nu conj(f_z)`` and its truncations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .grid import ComplexField, GridSpec, sample

DEGENERATE_FZ = 1e-14


class CoefficientWarning(UserWarning):
    """Emitted when ``|mu| + |nu| >= 1`` at some node."""


@dataclass(frozen=True)
class TruncationLevel:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"truncation level must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def bound(self) -> float:
        """Largest ``|mu| + |nu|`` compatible with ``K_{mu,nu} <= n``."""
        return (self.n - 1) / (self.n + 1)


def _as_level(level) -> TruncationLevel:
    return level if isinstance(level, TruncationLevel) else TruncationLevel(level)


def _support_radius(spec: GridSpec, active: np.ndarray) -> float:
    if not active.any():
        return 0.0
    return float(np.abs(spec.nodes()[active]).max())


@dataclass(frozen=True)
class CoefficientField:
    mu: ComplexField
    nu: ComplexField
    support_radius: float | None = None

    def __post_init__(self):
        if self.mu.spec != self.nu.spec:
            raise InvalidArgument("mu and nu must share a grid")
        active = (self.mu.values != 0) | (self.nu.values != 0)
        measured = _support_radius(self.spec, active)
        if self.support_radius is None:
            object.__setattr__(self, "support_radius", measured)
        elif measured > self.support_radius * (1 + 1e-12):
            raise InvalidArgument(
                f"coefficient is nonzero at |z| = {measured:.6g} beyond support_radius {self.support_radius}"
            )

    @property
    def spec(self) -> GridSpec:
        return self.mu.spec

    @classmethod
    def from_functions(cls, mu_fn, nu_fn, spec: GridSpec) -> "CoefficientField":
        mu = sample(mu_fn, spec, "coefficient")
        nu = sample(nu_fn if nu_fn is not None else (lambda z: 0j), spec, "coefficient")
        return cls(mu, nu)

    @classmethod
    def zero(cls, spec: GridSpec) -> "CoefficientField":
        z = np.zeros(spec.shape, complex)
        return cls(ComplexField(spec, z, "coefficient"), ComplexField(spec, z, "coefficient"))

    @property
    def strength(self) -> np.ndarray:
        """Pointwise ``|mu| + |nu|``."""
        return np.abs(self.mu.values) + np.abs(self.nu.values)

    @property
    def ess_sup(self) -> float:
        return float(self.strength.max())

    def violations(self) -> np.ndarray:
        """Indices ``(i, j)`` of nodes where ``|mu| + |nu| >= 1``."""
        return np.argwhere(self.strength >= 1.0)


def joint_dilatation(coeff: CoefficientField) -> ComplexField:
    """``K_{mu,nu} = (1 + |mu| + |nu|) / (1 - |mu| - |nu|)`` as a real scalar field.

    Nodes violating ``|mu| + |nu| < 1`` get ``+inf`` and trigger a
    :class:`CoefficientWarning` naming how many there are.
    """
    s = coeff.strength
    bad = s >= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(bad, np.inf, (1 + s) / (1 - s))
    if bad.any():
        warnings.warn(f"|mu|+|nu| >= 1 at {int(bad.sum())} nodes", CoefficientWarning, stacklevel=2)
    return ComplexField(coeff.spec, k, "scalar")


def single_dilatation(mu_value) -> float:
    m = abs(complex(mu_value))
    if m >= 1:
        raise InvalidArgument(f"|mu| must be < 1, got {m}")
    return (1 + m) / (1 - m)


def truncate(coeff: CoefficientField, level) -> CoefficientField:
    """Keep (mu, nu) where ``K_{mu,nu} <= n`` and zero them elsewhere.

    The comparison is exact; ``n = 1`` therefore removes every nonzero node.
    """
    # K <= n  <=>  |mu| + |nu| <= (n - 1)/(n + 1); comparing strengths avoids
    # the rounding of (1 + s)/(1 - s) to 1 for tiny s
    keep = coeff.strength <= _as_level(level).bound
    mu = np.where(keep, coeff.mu.values, 0)
    nu = np.where(keep, coeff.nu.values, 0)
    return CoefficientField(coeff.mu.with_values(mu), coeff.nu.with_values(nu))


def effective_mu(coeff: CoefficientField, f_z: ComplexField) -> tuple[ComplexField, np.ndarray]:
    """Single-characteristic coefficient ``mu + nu conj(f_z) / f_z``.

    Returns the field and a boolean mask of nodes where ``|f_z| < 1e-14``;
    those nodes fall back to ``mu`` alone.
    """
    if f_z.spec != coeff.spec:
        raise InvalidArgument("f_z must be sampled on the coefficient grid")
    fz = f_z.values
    flagged = np.abs(fz) < DEGENERATE_FZ
    safe = np.where(flagged, 1.0, fz)
    phase = np.conj(safe) / safe
    out = coeff.mu.values + np.where(flagged, 0, coeff.nu.values * phase)
    return coeff.mu.with_values(out), flagged
