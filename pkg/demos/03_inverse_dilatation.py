# Inverse maps, their inner dilatation and the change-of-variables identity.
import numpy as np

from beltrami import oracle
from beltrami.coefficients import CoefficientField, truncate
from beltrami.dilatation import change_of_variables_check, dilatation_report
from beltrami.grid import make_grid
from beltrami.regions import Disk
from beltrami.solver import inverse_map, solve_principal
from beltrami.transforms import make_plan

spec = make_grid(0, 1.5, 512)
coeff = CoefficientField.from_functions(lambda z: oracle.mu_example(z, 1.0), None, spec)
f = solve_principal(truncate(coeff, 3), make_plan(spec), tol=1e-9)
g = inverse_map(f)
print("inversion failures:", g.diagnostics["inversion_failures"])

rep = dilatation_report(g, Disk(0, 1), p=2)
print("K_I,2 over the unit disk:", rep.to_dict())
print("integral of the majorant over the disk (upper bound):", 3 * np.pi)

for p in (1.5, 2.0):
    lhs, rhs, gap = change_of_variables_check(f, g, Disk(0, 0.95), p)
    print(f"p={p}: int ||f'||^p = {lhs:.4f}, int K_I,p(g) over f(C) = {rhs:.4f}, rel gap {gap:.1e}")
