"""Random orthotropic ensemble and its product-metric Frechet mean."""

import numpy as np

from kelvinlie.classes import build_full
from kelvinlie.means import frechet_mean
from kelvinlie.metrics import dist_product
from kelvinlie.stochastic import GenConfig, random_kelvin

z0 = np.array([0.3, -0.2, 0.5, 0.2, -0.1, 0.4, *np.log([30, 20, 15, 10, 8, 6])])
cfg = GenConfig("ortho_3d", z0, 0.05 ** 2, seed=7)
batch = random_kelvin(cfg, 2000, workers=4)
ref = build_full("ortho_3d", z0)[1]

product = frechet_mean(batch.triples, "product")
euclid = frechet_mean(list(batch.matrices), "euclid")
print(f"config {batch.config_hash[:12]}, {len(batch)} samples")
print(f"product mean: {product.iterations} iterations, distance to reference "
      f"{dist_product(product.triple, ref):.4f}, variance {product.variance:.4f}")
print(f"det of reference {np.linalg.det(ref.matrix()):.4e}")
print(f"det of product mean {np.linalg.det(product.mean):.4e}")
print(f"det of Euclidean mean {np.linalg.det(euclid.mean):.4e}")
