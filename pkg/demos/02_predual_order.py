"""
Two orders on matrices of functionals
=====================================

A 2 x 2 matrix of functionals on M_2 can be positive in the predual order
while its operator matrix is not, and the other way round.
"""

import numpy as np

from fidlab.predual import (coincidence_probe, is_predual_positive, operator_matrix,
                            example_delta, example_omega)

for label, omega in [("Omega", example_omega()), ("Delta", example_delta())]:
    cert = is_predual_positive(omega)
    ops = operator_matrix(omega)
    print(label)
    print("  predual positive     ", cert.verdict)
    print("  operator matrix PSD  ", ops.psd)
    print("  operator eigenvalues ", np.round(ops.eigenvalues, 12))

# Complete positivity checked in either order gives the same verdict on
# random maps over small matrix algebras.
for d in (2, 3):
    report = coincidence_probe(d, n_maps=20, seed=d)
    print(f"d={d}: verdicts agree on {report.agreements}/{report.n_maps} maps ({report.n_cp} CP)")
