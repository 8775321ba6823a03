"""
Fidelity by several routes
==========================

Computes the fidelity of two density elements of a block algebra in
several independent ways and shows where the variational routes land.
"""

import numpy as np

from fidlab import AlgebraElement, TracialAlgebra, fidelity
from fidlab.fidelity import bures_distance, fidelity_routes
from fidlab.sampling import random_density

rng = np.random.default_rng(7)

# A two-block algebra M_2 + M_3 whose trace weighs the second block by 1/2
alg = TracialAlgebra([(2, 1.0), (3, 0.5)])
sigma = random_density(alg, rng)
rho = random_density(alg, rng)

print("fidelity       ", fidelity(sigma, rho))
print("Bures distance ", bures_distance(sigma, rho))

# Every route at once; the diagnostics say how each optimizer ended
values, diag = fidelity_routes(sigma, rho, rng=rng)
for name, value in values.items():
    print(f"  {name:6s} {value:.12f}")

# The Var2 route returns tau(sigma + rho) / 2 = 1 for any pair of states:
# its objective is tau((sigma + rho)(y + 1/y)), which is smallest at y = 1.
print("var1 iterations", diag["var1"]["iterations"])
print("var2 value     ", values["var2"])

# Orthogonal pure states make the gap plain
ket0 = AlgebraElement.from_matrix(np.diag([1.0, 0.0]).astype(complex))
ket1 = AlgebraElement.from_matrix(np.diag([0.0, 1.0]).astype(complex))
values, _ = fidelity_routes(ket0, ket1, routes=("direct", "mu", "block", "var2"))
print(values)
