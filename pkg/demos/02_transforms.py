# The two singular integrals behind the solver, checked on the unit disk.
import numpy as np

from beltrami.grid import ComplexField, make_grid
from beltrami.regions import Disk, disk_cell_weights
from beltrami.transforms import beurling_transform, cauchy_transform, make_plan

spec = make_grid(0, 2.0, 512)
plan = make_plan(spec)
chi = ComplexField(spec, disk_cell_weights(spec, Disk(0, 1)).astype(complex))  # exact cell fractions

C = cauchy_transform(chi, plan)
S = beurling_transform(chi, plan)

for p in (0.3 + 0.4j, -0.5j, 1.3, -1.1 + 0.9j):
    inside = abs(p) < 1
    want_c = np.conj(p) if inside else 1 / p
    want_s = 0 if inside else -1 / p**2
    print(f"z={p!s:>12}  C: {C(p):.5f} vs {want_c:.5f}   S: {S(p):.5f} vs {want_s:.5f}")

# S is an isometry of L^2; on the padded torus this holds to rounding for mean-zero data
from beltrami.transforms import beurling_array

rng = np.random.default_rng(1)
h = rng.normal(size=spec.shape) * np.exp(-4 * np.abs(spec.nodes()) ** 2)
h -= h.mean()
out = beurling_array(h.astype(complex), plan, return_padded=True)
print("||Sh|| / ||h|| =", np.linalg.norm(out) / np.linalg.norm(h))
