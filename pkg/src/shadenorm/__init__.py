"""Shading-sequence normal recovery: ring light paths, clamped Lambertian
shading, least-squares normal estimation, coverage checks, evaluation
metrics and noise-robustness studies."""
from .core import LightPath, NormalMap, RingSpec, gen_ring, sample_cap, synth_sphere
from .coverage import CoverageReport, min_lights, verify_coverage
from .metrics import (MetricsReport, angular_error_map, extract_boundary, mae_stats, psnr, sne,
                      ssim, tv)
from .render import ShadingSequence, decode_signed, encode_signed, render_shading
from .robustness import perturb_normals, perturb_shading, run_robustness
from .solver import SolveResult, Status, solve_masked, solve_naive

__version__ = "0.1.0"
