"""
Ring lights and hemisphere coverage
===================================

How many lights on a ring are needed so every visible normal sees at
least three of them?
"""

import numpy as np

from shadenorm import RingSpec, gen_ring, min_lights, verify_coverage

# A 9-light ring at 45 degrees elevation. Each row is a unit light direction.
ring = gen_ring(RingSpec(count=9, elevation_deg=45.0))
print(np.round(ring.directions, 3))

# Count lit lights for every normal on a dense grid of the upper cap.
rep = verify_coverage(ring, m=3, n_samples=100_000)
print("fewest lit lights:", rep.min_positive_count)
print("histogram of lit-light counts:", rep.histogram)

# Shrink the ring until some normal drops below three lit lights.
for count in (5, 6):
    r = verify_coverage(gen_ring(RingSpec(count, 45.0)), m=3, n_samples=0)
    print(f"{count} lights -> min {r.grid_min}, ok={r.meets_requirement}")

# The search sweeps the ring phase too, so the answer holds for any rotation.
res = min_lights(elevation_deg=45.0, m=3)
print("smallest ring:", res.count)

# A single light at elevation e lights 1/2 + e/pi of the hemisphere.
for e in (0.1, 30.0, 60.0):
    frac = verify_coverage(gen_ring(RingSpec(1, e)), m=1, min_z=0.0).illuminated_fraction
    print(f"elevation {e:5.1f}: lit fraction {frac:.4f}  law {0.5 + np.radians(e) / np.pi:.4f}")
