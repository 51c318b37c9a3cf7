"""
Evaluation metrics
==================

Angular error statistics, boundary error, total variation and image
similarity on a small synthetic example.
"""

import numpy as np

from shadenorm import (NormalMap, RingSpec, extract_boundary, gen_ring, perturb_normals,
                       psnr, render_shading, sne, ssim, synth_sphere)
from shadenorm.metrics import evaluate_normals, tv_normal_map, tv_sequence

gt = synth_sphere(96)
est = perturb_normals(gt, 0.05, seed=0)

rep = evaluate_normals(est, gt)
print(f"mean {rep.mae_deg:.3f}  median {rep.median_deg:.3f}  over {rep.n_pixels} px")
for t, p in rep.pct_below.items():
    print(f"  < {t:5.2f} deg: {p:5.1f}%")

# Boundary pixels: the silhouette plus any sharp crease, grown by one pixel.
b = extract_boundary(gt)
print("boundary pixels:", int(b.sum()), " SNE (deg):", round(sne(est, gt, b), 3))

# Two flat halves meeting at a crease give a one pixel seam before dilation.
n = np.zeros((8, 8, 3))
n[:, :4] = [0.0, 0.0, 1.0]
n[:, 4:] = [np.sin(0.5), 0.0, np.cos(0.5)]
crease = NormalMap(n, np.ones((8, 8), bool))
print(extract_boundary(crease, dilate_px=0).astype(int))

# TV of the colour-encoded normals versus the rendered shading.
seq = render_shading(gt, gen_ring(RingSpec(9, 45.0)))
print("TV normals:", tv_normal_map(gt), " TV shading:", tv_sequence(seq))

# PSNR and SSIM between a frame and a slightly noisy copy.
rng = np.random.default_rng(1)
frame = seq.frames[0]
noisy = np.clip(frame + 0.02 * rng.standard_normal(frame.shape), 0, 1)
print("PSNR:", psnr(noisy, frame, seq.mask), " SSIM:", ssim(noisy, frame, seq.mask))
