"""
Which channels keep fidelity fixed?
===================================

Classifies a small zoo of channels, recovers the unitary behind the
fidelity-preserving ones, and walks up the CAR tower.
"""

import numpy as np

from fidlab.car import car_level, fidelity_stability
from fidlab.channels import phase_distance, unitary_channel
from fidlab.harness import injectivity_probe, labeled_zoo, preservation_classify
from fidlab.sampling import random_density, random_unitary

for name, ch, _expected in labeled_zoo(2):
    c = preservation_classify(ch)
    inj = injectivity_probe(ch)
    print(f"{name:22s} {c.verdict.value:28s} smallest singular value {inj.smallest_singular_value:.3f}")

rng = np.random.default_rng(0)
u = random_unitary(car_level(1), rng)
c = preservation_classify(unitary_channel(u))
print("recovered up to phase:", phase_distance(c.unitary, u))

# x -> x (x) 1 keeps the fidelity fixed at every level
alg = car_level(2)
s, r = random_density(alg, rng), random_density(alg, rng)
print(fidelity_stability(s, r, depth=4))
