"""
Monotonicity and the Bures triangle inequality
==============================================

Seeded sweeps: fidelity never drops under a channel, and sqrt(1 - F)
obeys the triangle inequality.
"""

from fidlab.channels import depolarizing
from fidlab.harness import metric_sweep, monotonicity_sweep

for d in (2, 4):
    rep = monotonicity_sweep("random_cptp", d, 200, seed=1)
    print(rep.summary)

# Orthogonal inputs show the strict increase under depolarizing noise
rep = monotonicity_sweep(depolarizing(2, 0.5), 2, 50, seed=2, pair_kind="orthogonal")
print("depolarizing, orthogonal pairs, smallest gain:", rep.min_margin)

rep = metric_sweep(3, 300, seed=3)
print(rep.summary)
print("symmetry defect", rep.details["symmetry_defect"])

# Same seed, same report
assert monotonicity_sweep("random_cptp", 3, 20, seed=5) == monotonicity_sweep("random_cptp", 3, 20, seed=5)
