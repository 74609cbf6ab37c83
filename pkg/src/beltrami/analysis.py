"""Modulus, capacity and the normality/compactness criteria for a majorant ``Q``.

``Q`` may be passed either as a vectorised callable ``y -> Q(y)`` or as a
real-valued :class:`~beltrami.grid.ComplexField`; fields are read by bilinear
interpolation and impose a grid floor on every radius that is examined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidArgument
from .grid import ComplexField, GridSpec, make_grid
from .regions import Box, Disk, disk_cell_weights
from .solver import SampledMap

CIRCLE_SAMPLES = 720


@dataclass(frozen=True)
class Annulus:
    center: complex
    r1: float
    r2: float

    def __post_init__(self):
        if not (0 < self.r1 < self.r2):
            raise InvalidArgument(f"annulus radii must satisfy 0 < r1 < r2, got {self.r1}, {self.r2}")
        object.__setattr__(self, "center", complex(self.center))


class _Majorant:
    """Uniform read access to a callable or sampled ``Q``."""

    def __init__(self, Q):
        self.field = Q if isinstance(Q, ComplexField) else None
        self._fn = Q

    @property
    def spacing(self) -> float:
        return self.field.spec.spacing if self.field is not None else 0.0

    def __call__(self, y) -> np.ndarray:
        if self.field is not None:
            return np.real(self.field(y))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.real(np.asarray(self._fn(y), dtype=complex))

    def check_disk(self, center, radius):
        if self.field is None:
            return
        spec = self.field.spec
        reach = spec.halfwidth - 0.5 * spec.spacing
        c = complex(center) - spec.center
        if max(abs(c.real), abs(c.imag)) + radius > reach:
            raise InvalidArgument(f"circle of radius {radius} about {center} leaves the grid window")


def _as_majorant(Q) -> _Majorant:
    return Q if isinstance(Q, _Majorant) else _Majorant(Q)


def circle_average(Q, y0: complex, r: float, samples: int = CIRCLE_SAMPLES) -> float:
    """``(1/2pi) \\int Q(y0 + r e^{it}) dt`` by the periodic trapezoid rule.

    Returns ``inf`` when any sample is infinite.
    """
    q = _as_majorant(Q)
    if r <= 0:
        raise InvalidArgument("radius must be positive")
    q.check_disk(y0, r)
    t = 2 * np.pi * np.arange(samples) / samples
    vals = q(y0 + r * np.exp(1j * t))
    if np.any(np.isnan(vals)) or np.any(np.isinf(vals)):
        return float("inf")
    return float(vals.mean())


@dataclass(frozen=True)
class IntegrabilityScan:
    passed: bool
    witness_radii: np.ndarray
    fraction: float


def circle_integrability_scan(
    Q, y0: complex, r1: float = 0.05, r2: float = 0.95, samples: int = 32, threshold: float = 0.1, max_radius: float = 1.0
) -> IntegrabilityScan:
    """Proxy for "Q is integrable on S(y0, r) for a set of r of positive measure".

    Passes when at least ``threshold`` of the ``samples`` radii in ``[r1, r2]``
    give a finite circle average.
    """
    if not (0 < r1 < r2 < max_radius):
        raise InvalidArgument(f"need 0 < r1 < r2 < {max_radius}, got {r1}, {r2}")
    q = _as_majorant(Q)
    radii = r1 + (np.arange(samples) + 0.5) * (r2 - r1) / samples
    finite = np.array([np.isfinite(circle_average(q, y0, r)) for r in radii])
    frac = float(finite.mean())
    return IntegrabilityScan(frac >= threshold, radii[finite], frac)


@dataclass(frozen=True)
class DivergenceResult:
    passed: bool
    value: float
    increments: np.ndarray
    ratios: np.ndarray
    certificate: str = ""


def divergence_check(
    Q, w0: complex, delta: float, octaves: int = 40, nodes: int = 16, threshold: float = 0.9, window: int = 5
) -> DivergenceResult:
    """Decide whether ``\\int_0^delta dt / (t q_{w0}(t))`` diverges.

    The integral is split into octaves ``[delta 2^-j, delta 2^-(j-1)]``, each
    integrated by Gauss-Legendre in ``log t``. A convergent tail shows
    geometric decay of the increments; the integral is declared divergent when
    the geometric mean of the last ``window`` increment ratios is at least
    ``threshold``. Otherwise ``value`` is the integral with the geometric tail
    added. Sampled ``Q`` stops the ladder two grid spacings above zero.
    """
    if delta <= 0:
        raise InvalidArgument("delta must be positive")
    q = _as_majorant(Q)
    q.check_disk(w0, delta)
    if q.field is not None:
        octaves = min(octaves, int(np.floor(np.log2(delta / (2 * q.spacing)))))
        if octaves < window + 1:
            raise InvalidArgument("grid too coarse for the divergence ladder")
    x, wts = np.polynomial.legendre.leggauss(nodes)
    incs = []
    for j in range(1, octaves + 1):
        lo, hi = np.log(delta) - j * np.log(2), np.log(delta) - (j - 1) * np.log(2)
        u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        qs = np.array([circle_average(q, w0, np.exp(ui)) for ui in u])
        if np.all(qs == 0):
            return DivergenceResult(True, float("inf"), np.array(incs), np.array([]), f"q vanishes on octave {j}")
        with np.errstate(divide="ignore"):
            incs.append(float(0.5 * (hi - lo) * np.sum(wts / qs)))
    incs = np.array(incs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = incs[1:] / incs[:-1]
    tail = ratios[-window:]
    if np.all(incs[-window:] == 0):
        return DivergenceResult(False, float(incs.sum()), incs, ratios)
    rbar = float(np.exp(np.mean(np.log(tail)))) if np.all(tail > 0) else 0.0
    if rbar >= threshold:
        return DivergenceResult(True, float("inf"), incs, ratios, f"increment ratio {rbar:.4f} >= {threshold}")
    value = float(incs.sum() + incs[-1] * rbar / (1 - rbar))
    return DivergenceResult(False, value, incs, ratios)


@dataclass(frozen=True)
class FMOResult:
    status: str  # pass | fail | undetermined
    eps: np.ndarray
    oscillations: np.ndarray
    limsup_estimate: float


def _disk_mean_oscillation(q: _Majorant, z0, eps, quad=(48, 128)):
    if q.field is not None:
        spec = q.field.spec
        w = disk_cell_weights(spec, Disk(z0, eps))
        sel = w > 0
        vals = np.real(q.field.values[sel])
        w = w[sel]
    else:
        x, wr = np.polynomial.legendre.leggauss(quad[0])
        r = 0.5 * eps * (x + 1)
        t = 2 * np.pi * np.arange(quad[1]) / quad[1]
        pts = z0 + r[:, None] * np.exp(1j * t[None, :])
        vals = q(pts).ravel()
        w = np.repeat(wr * r, quad[1])
    if not np.all(np.isfinite(vals)):
        return float("inf")
    mean = np.sum(w * vals) / w.sum()
    return float(np.sum(w * np.abs(vals - mean)) / w.sum())


def fmo_estimate(Q, z0: complex, eps_ladder=None, min_levels: int = 3) -> FMOResult:
    """Mean oscillation of ``Q`` over ``B(z0, eps)`` along a shrinking ladder.

    ``pass`` when the last half of the ladder stays within twice the median;
    sampled ``Q`` drops radii below four grid spacings, and the outcome is
    ``undetermined`` when fewer than ``min_levels`` radii survive.
    """
    q = _as_majorant(Q)
    eps = np.sort(np.asarray(eps_ladder if eps_ladder is not None else 0.5 * 2.0 ** -np.arange(12), float))[::-1]
    q.check_disk(z0, eps[0])
    if q.field is not None:
        eps = eps[eps >= 4 * q.spacing]
    if eps.size < min_levels:
        return FMOResult("undetermined", eps, np.array([]), float("nan"))
    osc = np.array([_disk_mean_oscillation(q, z0, e) for e in eps])
    last = osc[eps.size // 2 :]
    limsup = float(last.max())
    ok = np.isfinite(limsup) and limsup <= 2 * np.median(osc)
    return FMOResult("pass" if ok else "fail", eps, osc, limsup)


def discrete_capacity(spec: GridSpec, inner: np.ndarray, outer: np.ndarray) -> float:
    """Dirichlet energy of the discrete harmonic potential (0 on ``inner``, 1 on ``outer``).

    Five-point stencil; the energy ``sum over grid edges of (u_a - u_b)^2`` is
    scale invariant and approximates the modulus of the family of paths that
    join the two sets.
    """
    inner = np.asarray(inner, bool)
    outer = np.asarray(outer, bool)
    if inner.shape != spec.shape or outer.shape != spec.shape:
        raise InvalidArgument("masks must match the grid")
    if not inner.any() or not outer.any():
        raise InvalidArgument("both continua must be nonempty")
    if (inner & outer).any():
        raise InvalidArgument("continua overlap")
    if (inner[1:, :] & outer[:-1, :]).any() or (inner[:-1, :] & outer[1:, :]).any() or \
            (inner[:, 1:] & outer[:, :-1]).any() or (inner[:, :-1] & outer[:, 1:]).any():
        raise InvalidArgument("continua touch")

    n = spec.resolution
    fixed = inner | outer
    u = np.where(outer, 1.0, 0.0)
    free = ~fixed
    idx = -np.ones(spec.shape, dtype=np.int64)
    idx[free] = np.arange(int(free.sum()))
    nfree = int(free.sum())

    rows, cols, vals = [], [], []
    rhs = np.zeros(nfree)
    deg = np.zeros(spec.shape)
    for sa, sb in (((slice(1, None), slice(None)), (slice(None, -1), slice(None))),
                   ((slice(None), slice(1, None)), (slice(None), slice(None, -1)))):
        deg[sa] += 1
        deg[sb] += 1
        for a, b in ((sa, sb), (sb, sa)):
            ia, ib = idx[a], idx[b]
            both = (ia >= 0) & (ib >= 0)
            rows.append(ia[both])
            cols.append(ib[both])
            vals.append(-np.ones(int(both.sum())))
            bnd = (ia >= 0) & (ib < 0)
            np.add.at(rhs, ia[bnd], u[b][bnd])
    rows.append(idx[free])
    cols.append(idx[free])
    vals.append(deg[free])
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nfree, nfree))
    if nfree:
        u[free] = spla.spsolve(A.tocsc(), rhs)
    energy = np.sum(np.diff(u, axis=0) ** 2) + np.sum(np.diff(u, axis=1) ** 2)
    return float(energy)


def annulus_capacity(r1: float, r2: float, resolution: int = 512, center: complex = 0) -> float:
    """Discrete capacity of the round ring ``r1 < |z - center| < r2``."""
    spec = make_grid(center, 1.05 * r2, resolution)
    d = np.abs(spec.nodes() - center)
    return discrete_capacity(spec, d <= r1, d >= r2)


def _eta(kind, r1, r2):
    if kind == "uniform":
        return lambda t: np.full_like(t, 1.0 / (r2 - r1))
    if kind == "log":
        return lambda t: 1.0 / (t * np.log(r2 / r1))
    raise InvalidArgument(f"unknown eta kind {kind!r}")


def poletsky_rhs(Q, ann: Annulus, eta_kind: str = "log", nodes: int = 64) -> float:
    """``\\int_A Q(y) eta(|y - y0|)^2 dm(y)`` in polar coordinates."""
    q = _as_majorant(Q)
    eta = _eta(eta_kind, ann.r1, ann.r2)
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (ann.r2 - ann.r1) * x + 0.5 * (ann.r2 + ann.r1)
    qs = np.array([circle_average(q, ann.center, ti) for ti in t])
    return float(0.5 * (ann.r2 - ann.r1) * np.sum(w * eta(t) ** 2 * 2 * np.pi * qs * t))


@dataclass(frozen=True)
class PoletskyResult:
    lhs: float
    rhs: float
    holds: bool


def inverse_poletsky_check(
    f: SampledMap, Q, ann: Annulus, eta_kind: str = "log", g: SampledMap | None = None, slack: float = 0.05
) -> PoletskyResult:
    """Modulus of the paths whose images cross ``ann`` versus ``\\int_A Q eta^2``.

    The left side is the capacity of the preimage ring ``{z : f(z) in A}``
    between ``{|f - y0| <= r1}`` and ``{|f - y0| >= r2}`` on the grid of
    ``f``. When ``g = f^{-1}`` is supplied it must send ``y0`` into the inner
    continuum.
    """
    vals = f.values
    d = np.abs(vals - ann.center)
    inner = d <= ann.r1
    outer = d >= ann.r2
    ring = np.ones(f.spec.shape, bool)
    ring[1:-1, 1:-1] = False
    if not outer[ring].all():
        raise InvalidArgument("preimage of the annulus is not contained in the grid window")
    if not inner.any():
        raise InvalidArgument("preimage of the inner disk is not resolved by the grid")
    if g is not None:
        z0 = g(np.array([ann.center]))[0]
        if not np.isfinite(z0) or abs(f(np.array([z0]))[0] - ann.center) > ann.r1:
            raise InvalidArgument("g does not invert f at the annulus centre")
    lhs = discrete_capacity(f.spec, inner, outer)
    rhs = poletsky_rhs(Q, ann, eta_kind)
    return PoletskyResult(lhs, rhs, bool(lhs <= rhs * (1 + slack)))


@dataclass(frozen=True)
class EquicontinuityResult:
    C_hat: float
    worst: tuple  # (map index, x, y)
    per_map: list


def equicontinuity_bound(maps, K: Disk, G: Disk, pairs: int = 10_000, seed: int = 0) -> EquicontinuityResult:
    """Empirical constant in ``|f(x) - f(y)| <= C / log^{1/2}(1 + r0 / (2|x - y|))``.

    ``r0 = dist(K, boundary of G)``; the maximum is taken over every map and
    ``pairs`` random pairs of grid nodes in ``K``.
    """
    r0 = G.radius - abs(K.center - G.center) - K.radius
    if r0 <= 0:
        raise InvalidArgument("K must lie compactly inside G")
    rng = np.random.default_rng(seed)
    best, worst, per_map = -1.0, None, []
    for m, f in enumerate(maps):
        if not G.inside_window(f.spec):
            raise InvalidArgument(f"map {m} is not sampled over G")
        z = f.spec.nodes()
        sel = K.contains(z)
        pts, img = z[sel], f.values[sel]
        if pts.size < 2:
            raise InvalidArgument("K contains fewer than two grid nodes")
        a = rng.integers(0, pts.size, pairs)
        b = rng.integers(0, pts.size, pairs)
        keep = a != b
        a, b = a[keep], b[keep]
        dist = np.abs(pts[a] - pts[b])
        val = np.abs(img[a] - img[b]) * np.sqrt(np.log1p(r0 / (2 * dist)))
        i = int(np.argmax(val))
        per_map.append(float(val[i]))
        if val[i] > best:
            best, worst = float(val[i]), (m, complex(pts[a[i]]), complex(pts[b[i]]))
    return EquicontinuityResult(best, worst, per_map)


@dataclass
class ClassificationVerdict:
    circle_integrability: str
    fmo: str
    divergence: str
    verdict: str  # normal | compact | undetermined
    probes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "circle_integrability": self.circle_integrability,
            "fmo": self.fmo,
            "divergence": self.divergence,
            "verdict": self.verdict,
            "probes": self.probes,
        }


def _combine(statuses):
    if all(s == "pass" for s in statuses):
        return "pass"
    if any(s == "fail" for s in statuses):
        return "fail"
    return "undetermined"


def classify(
    Q, G, probes, r1: float = 0.05, r2: float = 0.95, delta: float = 0.5, eps_ladder=None
) -> ClassificationVerdict:
    """Normality (all circle scans pass) and compactness (FMO or divergence at every probe)."""
    q = _as_majorant(Q)
    probes = [complex(p) for p in probes]
    if not probes:
        raise InvalidArgument("at least one probe is required")
    if isinstance(G, (Disk, Box)) and not np.all(G.contains(np.array(probes))):
        raise InvalidArgument("probes must lie inside G")
    details = []
    for p in probes:
        scan = circle_integrability_scan(q, p, r1, r2)
        fmo = fmo_estimate(q, p, eps_ladder if eps_ladder is not None else delta * 2.0 ** -np.arange(12))
        try:
            div = divergence_check(q, p, delta)
            div_status, div_value = ("pass" if div.passed else "fail"), div.value
        except InvalidArgument:
            div_status, div_value = "undetermined", None
        details.append({
            "probe": [p.real, p.imag],
            "circle_integrability": "pass" if scan.passed else "fail",
            "witness_fraction": scan.fraction,
            "fmo": fmo.status,
            "fmo_limsup": fmo.limsup_estimate,
            "divergence": div_status,
            "divergence_value": div_value,
        })
    integ = _combine([d["circle_integrability"] for d in details])
    fmo_all = _combine([d["fmo"] for d in details])
    div_all = _combine([d["divergence"] for d in details])
    if integ != "pass":
        verdict = "undetermined"
    elif fmo_all == "pass" or div_all == "pass":
        verdict = "compact"
    elif fmo_all == "undetermined" or div_all == "undetermined":
        verdict = "undetermined"
    else:
        verdict = "normal"
    return ClassificationVerdict(integ, fmo_all, div_all, verdict, details)
