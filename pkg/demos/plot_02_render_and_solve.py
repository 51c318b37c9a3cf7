"""
Rendering a sphere and recovering its normals
=============================================

Render clamped Lambertian shading, then invert it per pixel with least
squares. Dropping the clamped frames matters.
"""

import numpy as np

from shadenorm import (RingSpec, Status, angular_error_map, gen_ring, mae_stats,
                       render_shading, solve_masked, solve_naive, synth_sphere)

gt = synth_sphere(128)
lights = gen_ring(RingSpec(9, 45.0))
seq = render_shading(gt, lights)
print("frames:", seq.frames.shape, "value range:", seq.frames.min(), seq.frames.max())

# Pixels facing away from a light read exactly zero in that frame.
shadowed = (seq.frames == 0) & gt.mask
print("zero samples per frame:", shadowed.sum(axis=(1, 2)))

# Masked solve keeps only frames with positive intensity.
masked = solve_masked(seq)
print("status counts:", {Status(k).name: int(v) for k, v in
                         zip(*np.unique(masked.status, return_counts=True))})
print("masked MAE (deg):", mae_stats(angular_error_map(masked.normals, gt))["mean"])

# The naive solve treats every zero as a real measurement and is biased.
naive = solve_naive(seq)
err = angular_error_map(naive.normals, gt)
clamped = np.any(seq.frames == 0, axis=0) & gt.mask
print("naive MAE on clamped pixels (deg):", np.nanmean(err[clamped]))
print("naive MAE on fully lit pixels (deg):", np.nanmean(err[gt.mask & ~clamped]))
