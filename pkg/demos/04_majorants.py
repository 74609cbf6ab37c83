# Capacity, the inverse Poletsky inequality and the normal/compact classification.
import numpy as np

from beltrami import oracle
from beltrami.analysis import Annulus, annulus_capacity, classify, divergence_check, inverse_poletsky_check
from beltrami.coefficients import CoefficientField
from beltrami.grid import make_grid
from beltrami.regions import Disk
from beltrami.solver import run_ladder
from beltrami.transforms import make_plan

for r2 in (2.0, np.e):
    print(f"cap of annulus (1, {r2:.3f}): {annulus_capacity(1, r2, 256):.4f}   exact {2 * np.pi / np.log(r2):.4f}")

Q = lambda y: oracle.Q_example(y, 1.0)
spec = make_grid(0, 1.5, 256)
coeff = CoefficientField.from_functions(lambda z: oracle.mu_example(z, 1.0), None, spec)
ladder = run_ladder(coeff, [3, 5, 9], make_plan(spec), tol=1e-9)
print("cauchy gaps:", [round(x, 4) for x in ladder.cauchy_gaps])
for n, f, g in zip(ladder.levels, ladder.solutions, ladder.inverses):
    r = inverse_poletsky_check(f, Q, Annulus(0, 0.2, 0.6), "log", g=g)
    print(f"level {n.n}: modulus {r.lhs:.3f} <= {r.rhs:.3f}: {r.holds}")

div = divergence_check(Q, 0, 0.5)
print("integral of dt/(t q(t)) near 0:", div.value, " log(1.5) =", np.log(1.5))
for name, q in (("Q = 1", lambda y: np.ones(np.shape(y))), ("example Q", Q)):
    print(name, "->", classify(q, Disk(0, 2), [0, 0.5]).verdict)
