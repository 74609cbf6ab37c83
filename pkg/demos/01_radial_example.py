# Solve the radial example at a few truncation levels and compare with the
# closed-form maps. Runs in well under a minute at 512^2.
import numpy as np

from beltrami import oracle
from beltrami.coefficients import CoefficientField, truncate
from beltrami.grid import make_grid
from beltrami.solver import invert_map, solve_principal
from beltrami.transforms import make_plan

spec = make_grid(0, 1.5, 512)
plan = make_plan(spec)  # FFT kernels, reused for every level
alpha = 1.0
coeff = CoefficientField.from_functions(lambda z: oracle.mu_example(z, alpha), None, spec)
print("support radius of mu:", round(coeff.support_radius, 4), " ess sup |mu|:", round(coeff.ess_sup, 4))

z = spec.nodes()
window = np.abs(z) <= 1.2
for k in (3, 5, 9):
    params = oracle.ExampleParams(alpha, k)
    f = solve_principal(truncate(coeff, k), plan, tol=1e-9)
    exact = oracle.f_k_example(z, params)
    err = np.abs(f.values - exact)[window]
    print(f"k={k}: rho={params.rho:.4f}  iterations={f.diagnostics['iterations']}"
          f"  sup err={err.max():.2e}  median err={np.median(err):.2e}")

    # the inner disk |z| < rho is mapped linearly onto |w| < image_radius
    w = 0.8
    print(f"      f^-1({w}) = {invert_map(f, [w])[0].real:.5f}   closed form {oracle.g_k_example(w, params).real:.5f}")

# as k grows the maps approach the limit that collapses |z| <= 1/2 to a point
print("f(0.4) for the limit map:", oracle.f_example(0.4, alpha))
