import numpy as np
import pytest

from beltrami.errors import InvalidArgument, SupportOverflow
from beltrami.grid import ComplexField, make_grid, wirtinger
from beltrami.regions import Disk, disk_cell_weights
from beltrami.transforms import beurling_array, beurling_transform, cauchy_transform, make_plan


def ray_cauchy_disk(z, radius=1.0, n=20000):
    """(1/pi) int_{|w|<radius} dm(w) / (z - w) via polar coordinates about z.

    With w = z + t e^{i phi} the integrand is -e^{-i phi} dt dphi, so the
    transform reduces to a 1-D integral of the chord length along each ray.
    """
    phi = 2 * np.pi * (np.arange(n) + 0.5) / n
    u = np.exp(1j * phi)
    b = np.real(np.conj(z) * u)
    disc = b * b - (abs(z) ** 2 - radius**2)
    sq = np.sqrt(np.clip(disc, 0, None))
    lo = np.clip(-b - sq, 0, None)
    hi = np.clip(-b + sq, 0, None)
    length = np.where(disc > 0, hi - lo, 0.0)
    return np.sum(-np.conj(u) * length) * (2 * np.pi / n) / np.pi


@pytest.fixture(scope="module")
def plan256():
    return make_plan(make_grid(0, 2.0, 256))


def disk_density(spec, radius=1.0):
    return ComplexField(spec, disk_cell_weights(spec, Disk(0, radius)).astype(complex), "scalar")


def test_zero_density(plan256):
    h = ComplexField(plan256.spec, np.zeros(plan256.spec.shape, complex), "scalar")
    assert np.all(cauchy_transform(h, plan256).values == 0)
    assert np.all(beurling_transform(h, plan256).values == 0)


def test_ray_oracle_matches_closed_form():
    for z in (0.3 + 0.2j, -0.7j, 1.4 + 0.1j, -2 + 1j):
        exact = np.conj(z) if abs(z) <= 1 else 1 / z
        assert abs(ray_cauchy_disk(z) - exact) < 1e-4


def test_cauchy_disk_identity(plan256, rng):
    spec = plan256.spec
    C = cauchy_transform(disk_density(spec), plan256)
    probes = np.concatenate([
        rng.uniform(0.05, 0.85, 10) * np.exp(2j * np.pi * rng.uniform(size=10)),
        rng.uniform(1.15, 1.6, 10) * np.exp(2j * np.pi * rng.uniform(size=10)),
    ])
    for z in probes:
        ref = ray_cauchy_disk(z)
        assert abs(C(z) - ref) <= 0.01 * abs(ref)


def _beurling_disk_errors(n):
    spec = make_grid(0, 2.0, n)
    S = beurling_transform(disk_density(spec), make_plan(spec)).values
    z = spec.nodes()
    r = np.abs(z)
    inside = r < 0.8
    outside = (r > 1.2) & (np.abs(z.real) < 1.6) & (np.abs(z.imag) < 1.6)
    return np.abs(S[inside]).max(), np.abs(S[outside] + 1 / z[outside] ** 2).max()


def test_beurling_disk_identity():
    # the density jumps across the circle, so the error away from it is first order in h
    coarse = _beurling_disk_errors(256)
    fine = _beurling_disk_errors(512)
    assert fine[0] < 1e-2 and fine[1] < 1e-2
    assert fine[0] < 0.6 * coarse[0] and fine[1] < 0.6 * coarse[1]


def bump(z, c=0, radius=1.0):
    """Smooth bump supported in |z - c| < radius."""
    t = np.abs(z - c) ** 2 / radius**2
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t < 1, np.exp(1 - 1 / (1 - np.minimum(t, 1 - 1e-300))), 0.0)


def test_cauchy_inverts_dbar():
    errs = []
    for n in (128, 256):
        spec = make_grid(0, 2.0, n)
        plan = make_plan(spec)
        z = spec.nodes()
        dens = bump(z, 0.1j, 1.2) * (1 + 0.5j * z.real)
        C = cauchy_transform(ComplexField(spec, dens, "scalar"), plan)
        _, dbar = wirtinger(C)
        core = np.abs(z) < 1.0
        errs.append(np.abs(dbar.values - dens)[core].max())
    assert errs[1] < 2e-3
    assert errs[1] < errs[0] / 3


def test_beurling_isometry_on_padded_torus(rng):
    spec = make_grid(0, 1.0, 128)
    plan = make_plan(spec)
    z = spec.nodes()
    h = np.zeros(spec.shape, complex)
    # band-limited mean-zero pattern under a smooth window
    for _ in range(6):
        k = rng.integers(-12, 13, 2)
        h += rng.normal() * np.exp(1j * np.pi * (k[0] * z.real + k[1] * z.imag))
    h *= np.exp(-12 * np.abs(z) ** 2)
    h -= h.mean() * np.exp(-12 * np.abs(z) ** 2) / np.exp(-12 * np.abs(z) ** 2).mean()
    out = beurling_array(h, plan, return_padded=True)
    ratio = np.linalg.norm(out) / np.linalg.norm(h)
    assert abs(ratio - 1) < 1e-10


def test_support_overflow():
    spec = make_grid(0, 1.0, 64)
    plan = make_plan(spec)
    with pytest.raises(SupportOverflow):
        cauchy_transform(ComplexField(spec, np.ones(spec.shape, complex), "scalar"), plan)


def test_plan_grid_mismatch():
    plan = make_plan(make_grid(0, 1.0, 64))
    h = ComplexField(make_grid(0, 2.0, 64), np.zeros((64, 64), complex), "scalar")
    with pytest.raises(InvalidArgument):
        cauchy_transform(h, plan)


def test_padding_validation():
    with pytest.raises(InvalidArgument):
        make_plan(make_grid(0, 1.0, 16), padding=3)


def test_linearity(plan256, rng):
    spec = plan256.spec
    z = spec.nodes()
    a = bump(z, 0, 1.0)
    b = bump(z, 0.3, 0.8) * z
    c = 0.7 - 1.2j
    lhs = beurling_transform(ComplexField(spec, a + c * b, "scalar"), plan256).values
    rhs = beurling_transform(ComplexField(spec, a, "scalar"), plan256).values + c * beurling_transform(
        ComplexField(spec, b, "scalar"), plan256
    ).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
