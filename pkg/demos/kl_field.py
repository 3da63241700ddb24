"""Karhunen-Loeve expansion of a Matern kernel and a random cubic field."""

import numpy as np

from kelvinlie.field import FieldSpec, Grid1D, MaternCov, kl_decompose, sample_random_field

grid = Grid1D.uniform(101)
kern = MaternCov(nu=1.5, ell=0.2)
kl = kl_decompose(grid, kern)
print(f"rank for 95% of the variance: {kl.rank95}")
for r in (1, 5, kl.rank95, 20):
    print(f"rank {r:3d}: truncation error {kl.truncation_error(r):.3e}")

z0 = np.array([0.0, 0.0, 0.0, np.log(60), np.log(30), np.log(20)])
spec = FieldSpec(kern, 0.05 ** 2, rank=kl.rank95)
field = sample_random_field("cubic_3d", z0, spec, grid, seed=3, count=1)[0]
d = field.det
print(f"det along the bar: min {d.min():.4e}, max {d.max():.4e}")
with open("cubic_field.csv", "w") as fh:
    field.to_csv(fh)
print("wrote cubic_field.csv")
