"""
Noise robustness
================

Add Gaussian noise to some shading frames, or to the normals directly, and
watch the mean angular error grow.
"""

from shadenorm import RingSpec, gen_ring, run_robustness, synth_sphere

gt = synth_sphere(96)
lights = gen_ring(RingSpec(9, 45.0))

rep = run_robustness(gt, lights, sigmas=(0.05, 0.1, 0.2, 0.4), frame_counts=(1, 5, 9), runs=3)
print("clean MAE (deg):", rep.clean_mae_deg)
print(rep.metadata)

table = rep.table()
sigmas = sorted(next(iter(table.values())))
print("target      " + "".join(f"{s:>9g}" for s in sigmas))
for target, row in table.items():
    print(f"{target:<12}" + "".join(f"{row[s]:9.3f}" for s in sigmas))

# Noise lifts some shadowed zeros above the positivity threshold, and those
# pixels then solve with equations that should have been dropped. That is
# why noise on every frame can hurt more than noise on the normals.
