import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beltrami import oracle
from beltrami.coefficients import CoefficientField, truncate
from beltrami.errors import InvalidArgument, NoConvergence, SolverDivergence, SupportOverflow
from beltrami.grid import ComplexField, make_grid, wirtinger
from beltrami.solver import SampledMap, far_field_profile, inverse_map, invert_map, run_ladder, solve_principal
from beltrami.transforms import make_plan

from conftest import example_coeff


def bump(z, c=0, radius=1.0):
    t = np.abs(z - c) ** 2 / radius**2
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t < 1, np.exp(1 - 1 / (1 - np.minimum(t, 1 - 1e-300))), 0.0)


def smooth_coeff(spec, a, b, radius=0.6):
    z = spec.nodes()
    w = bump(z, 0, radius)
    return CoefficientField(ComplexField(spec, a * w * np.exp(1j * z.real), "coefficient"),
                            ComplexField(spec, b * w * np.exp(-2j * z.imag), "coefficient"))


@pytest.fixture(scope="module")
def plan128():
    return make_plan(make_grid(0, 1.5, 128))


def test_zero_coefficient_is_identity(plan128):
    f = solve_principal(CoefficientField.zero(plan128.spec), plan128)
    assert np.all(f.displacement.values == 0)
    assert f.diagnostics["iterations"] <= 1
    np.testing.assert_array_equal(f.f_z.values, 1)


def test_example_point_value(example_512):
    _, _, f, _ = example_512
    assert f(0.9) == pytest.approx(0.8, abs=2e-3)
    assert f(0.5) == pytest.approx(1 / 3, abs=2e-3)


def test_gap_ratio_below_contraction(example_512):
    _, _, f, _ = example_512
    d = f.diagnostics
    assert max(d["gap_ratios"]) <= d["contraction_bound"]
    assert d["relative_residual"] <= 1e-9


@settings(max_examples=6, deadline=None)
@given(a=st.floats(0.01, 0.45), b=st.floats(0, 0.45))
def test_solution_satisfies_equation(a, b):
    mismatch = []
    for n in (128, 256):
        spec = make_grid(0, 1.5, n)
        coeff = smooth_coeff(spec, a, b)
        f = solve_principal(coeff, make_plan(spec), 1e-11)
        mu, nu = coeff.mu.values, coeff.nu.values
        fz, fzb = f.f_z.values, f.f_zbar.values
        np.testing.assert_allclose(fzb, mu * fz + nu * np.conj(fz), atol=1e-9)
        assert not f.flagged.any()
        # the stored derivatives agree with differencing the displacement, to second order
        dz, dzb = wirtinger(f.displacement)
        core = np.abs(spec.nodes()) < 1.2
        mismatch.append(max(np.abs(dzb.values - fzb)[core].max(), np.abs(1 + dz.values - fz)[core].max()))
    assert mismatch[1] < 0.35 * mismatch[0]
    assert mismatch[1] < 5e-3 * (a + b)


def test_max_iter_exhaustion(plan128):
    coeff = smooth_coeff(plan128.spec, 0.4, 0.3)
    with pytest.raises(NoConvergence) as exc:
        solve_principal(coeff, plan128, 1e-14, max_iter=3)
    assert exc.value.iterations == 3


def test_divergence_detected():
    spec = make_grid(0, 1.5, 64)
    plan = make_plan(spec)
    plan.beurling_multiplier[...] *= 4  # break the isometry so the iteration expands
    with pytest.raises(SolverDivergence):
        solve_principal(smooth_coeff(spec, 0.5, 0.3), plan, 1e-12)


def test_rejects_non_elliptic(plan128):
    coeff = smooth_coeff(plan128.spec, 0.7, 0.5)
    with pytest.raises(InvalidArgument):
        solve_principal(coeff, plan128)


def test_support_must_avoid_margin(plan128):
    coeff = smooth_coeff(plan128.spec, 0.3, 0.0, radius=2.0)
    with pytest.raises(SupportOverflow):
        solve_principal(coeff, plan128)


def test_ladder_compliant_levels_identical(plan128):
    coeff = smooth_coeff(plan128.spec, 0.4, 0.2)  # K <= 1.6/0.4 = 4 <= 5
    lad = run_ladder(coeff, [5, 6, 7], plan128, tol=1e-12, invert=False)
    for f in lad.solutions[1:]:
        np.testing.assert_allclose(f.values, lad.solutions[0].values, atol=1e-13)
    assert max(lad.cauchy_gaps) < 1e-13


def test_ladder_example_gaps_decrease():
    spec = make_grid(0, 1.5, 256)
    lad = run_ladder(example_coeff(spec), [2, 3, 5, 9], make_plan(spec), tol=1e-9, window=None, invert=False)
    gaps = lad.cauchy_gaps
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert lad.limit is lad.solutions[-1]


def test_ladder_level_one_is_identity(plan128):
    lad = run_ladder(smooth_coeff(plan128.spec, 0.4, 0.2), [1], plan128, invert=False)
    assert np.all(lad.solutions[0].displacement.values == 0)


def test_ladder_rejects_unsorted_levels(plan128):
    with pytest.raises(InvalidArgument):
        run_ladder(CoefficientField.zero(plan128.spec), [3, 2], plan128)


def test_invert_identity(rng):
    f = SampledMap.identity(make_grid(0, 1.0, 32))
    w = rng.uniform(-0.8, 0.8, 50) + 1j * rng.uniform(-0.8, 0.8, 50)
    np.testing.assert_allclose(invert_map(f, w), w, atol=1e-12)


def test_invert_example_point(example_512):
    _, _, f, _ = example_512
    z = invert_map(f, [0.8])[0]
    assert z == pytest.approx(0.9, abs=2e-3)
    assert abs(f(z) - 0.8) < 1e-9


def test_invert_outside_image_is_nan():
    f = SampledMap.identity(make_grid(0, 1.0, 32))
    out = invert_map(f, [5 + 5j, 0.2])
    assert np.isnan(out[0]) and out[1] == pytest.approx(0.2)


def test_inverse_map_round_trip(example_512):
    spec, _, f, g = example_512
    w = spec.nodes()
    inside = np.abs(w) < 1.2
    # nodal values of g are Newton inverses of the interpolated f
    assert np.abs(f(g.values[inside]) - w[inside]).max() < 1e-8
    assert g.diagnostics["inversion_failures"] == 0
    # interpolating g between nodes costs O(h^2) where g is smooth
    z = spec.nodes()[inside]
    err = np.abs(g(f.values[inside]) - z)
    assert np.median(err) < 1e-4 and err.max() < 5e-3


def test_far_field_identity():
    prof = far_field_profile(SampledMap.identity(make_grid(0, 4.0, 64)), [1, 2, 3])
    assert np.all(prof.sup_errors == 0)


def test_far_field_synthetic_inverse_decay():
    spec = make_grid(0, 5.0, 512)
    f = SampledMap.from_function(lambda z: z + 1 / np.where(np.abs(z) < 0.3, 0.3, z), spec)
    prof = far_field_profile(f, [1, 2, 4])
    np.testing.assert_allclose(prof.sup_errors, [1, 0.5, 0.25], rtol=2e-3)
    assert prof.exponent == pytest.approx(1, abs=0.01)


def test_far_field_example_is_discretisation_limited():
    # f_3 is exactly the identity beyond the unit circle; the computed map
    # carries an O(h) far field that shrinks under refinement
    errs = []
    for n in (128, 256, 512):
        spec = make_grid(0, 1.5, n)
        f = solve_principal(truncate(example_coeff(spec), 3), make_plan(spec), 1e-9)
        errs.append(far_field_profile(f, [1.1, 1.3]).sup_errors)
    assert np.all(errs[2] < 1e-3)
    assert np.all(errs[2] < 0.6 * errs[0])


def test_far_field_rejects_large_radius():
    with pytest.raises(InvalidArgument):
        far_field_profile(SampledMap.identity(make_grid(0, 1.0, 16)), [2.0])
