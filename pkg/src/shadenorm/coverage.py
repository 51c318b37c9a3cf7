"""How many lights of a path strictly illuminate each camera-facing normal.

A normal v counts light l as illuminating when v . l > 0 (no threshold).
Coverage is checked twice: on a deterministic azimuth x elevation grid over
the cap z > min_z, and on seeded Monte Carlo draws from the same cap.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import LightPath, RingSpec, gen_ring, sample_cap
from .errors import ParameterError

GRID_AZIMUTHS = 721
GRID_ELEVATIONS = 181
DEFAULT_MIN_Z = 1e-3


@dataclass
class CoverageReport:
    min_positive_count: int
    histogram: dict  # positive count -> number of normals (grid and samples pooled)
    worst_normal: np.ndarray
    meets_requirement: bool
    m: int
    grid_min: int
    mc_min: Optional[int]
    illuminated_fraction: Optional[float]  # Monte Carlo share of normals with count >= 1
    sampling: dict = field(default_factory=dict)


def cap_grid(min_z, n_az=GRID_AZIMUTHS, n_el=GRID_ELEVATIONS):
    """Azimuth x elevation grid on the cap, boundary elevation excluded, apex included."""
    el0 = np.arcsin(min_z)
    el = el0 + (np.pi / 2 - el0) * np.arange(1, n_el + 1) / n_el
    az = np.linspace(0.0, 2 * np.pi, n_az)
    A, E = np.meshgrid(az, el, indexing="ij")
    v = np.stack([np.cos(E) * np.cos(A), np.cos(E) * np.sin(A), np.sin(E)], axis=-1)
    v = v.reshape(-1, 3)
    return v[v[:, 2] > min_z]


def positive_counts(normals, directions):
    return np.count_nonzero(normals @ np.asarray(directions).T > 0.0, axis=1)


def verify_coverage(lights: LightPath, m=3, min_z=DEFAULT_MIN_Z, n_samples=1_000_000, seed=0,
                    grid=None):
    if lights is None or len(lights) == 0:
        raise ParameterError("light path is empty")
    if m < 1:
        raise ParameterError(f"required count m must be >= 1, got {m}")
    if not 0.0 <= min_z < 1.0:
        raise ParameterError(f"min_z must lie in [0, 1), got {min_z}")
    d = lights.directions

    g = cap_grid(min_z) if grid is None else grid
    gc = positive_counts(g, d)
    gi = int(np.argmin(gc))
    worst, lowest = g[gi], int(gc[gi])
    counts = [gc]

    mc_min = frac = None
    if n_samples:
        s = sample_cap(n_samples, min_z, seed)
        sc = positive_counts(s, d)
        si = int(np.argmin(sc))
        mc_min = int(sc[si])
        frac = float(np.count_nonzero(sc >= 1) / sc.size)
        counts.append(sc)
        if mc_min < lowest:
            worst, lowest = s[si], mc_min

    allc = np.concatenate(counts)
    vals, freq = np.unique(allc, return_counts=True)
    hist = {int(k): int(c) for k, c in zip(vals, freq)}
    return CoverageReport(
        min_positive_count=lowest,
        histogram=hist,
        worst_normal=worst,
        meets_requirement=lowest >= m,
        m=int(m),
        grid_min=int(gc.min()),
        mc_min=mc_min,
        illuminated_fraction=frac,
        sampling={"grid": [GRID_AZIMUTHS, GRID_ELEVATIONS], "n": int(n_samples),
                  "min_z": float(min_z), "seed": int(seed)},
    )


@dataclass
class MinLightsResult:
    found: bool
    count: Optional[int]
    # for count - 1 (or max_count when not found): the phase and normal that fail
    failing_phase_deg: Optional[float] = None
    failing_normal: Optional[np.ndarray] = None
    failing_min_count: Optional[int] = None
    checked: dict = field(default_factory=dict)  # ring count -> worst grid minimum over phases


def _worst_phase(count, elevation_deg, phase_step_deg, grid, block=32):
    """Sweep ring phase over one period; return (min count, phase, worst normal)."""
    period = 360.0 / count
    phases = np.arange(0.0, period, phase_step_deg)
    best = None
    for s in range(0, len(phases), block):
        chunk = phases[s:s + block]
        dirs = np.concatenate([gen_ring(RingSpec(count, elevation_deg, float(ph))).directions
                               for ph in chunk])
        lit = (grid @ dirs.T > 0.0).reshape(grid.shape[0], len(chunk), count)
        c = lit.sum(axis=2)  # (N, phases)
        per_phase = c.min(axis=0)
        j = int(np.argmin(per_phase))
        if best is None or per_phase[j] < best[0]:
            i = int(np.argmin(c[:, j]))
            best = (int(per_phase[j]), float(chunk[j]), grid[i])
    return best


def min_lights(elevation_deg=45.0, m=3, min_z=DEFAULT_MIN_Z, max_count=16, phase_step_deg=0.5,
               n_samples=0, seed=0):
    """Smallest ring size whose every phase gives each cap normal >= m lit lights.

    Phases are swept on a ``phase_step_deg`` grid over one azimuthal period
    (the ring is symmetric under rotation by 360/count). With ``n_samples``
    the winning ring is also confirmed by Monte Carlo at its worst phase.
    """
    if max_count < 1 or m < 1:
        raise ParameterError("max_count and m must be >= 1")
    RingSpec(1, elevation_deg, 0.0)  # validates elevation
    grid = cap_grid(min_z)
    checked = {}
    prev = None
    for count in range(1, max_count + 1):
        if count < m - 1:
            # fewer lights than m cannot light m of them; only m - 1 is swept for evidence
            checked[count] = None
            continue
        lowest, phase, normal = _worst_phase(count, elevation_deg, phase_step_deg, grid)
        checked[count] = lowest
        if lowest >= m:
            if n_samples:
                rep = verify_coverage(gen_ring(RingSpec(count, elevation_deg, phase)), m, min_z,
                                      n_samples, seed, grid=grid)
                if not rep.meets_requirement:
                    prev = (rep.min_positive_count, phase, rep.worst_normal)
                    continue
            res = MinLightsResult(True, count, checked=checked)
            if prev is not None:
                res.failing_min_count, res.failing_phase_deg, res.failing_normal = prev
            return res
        prev = (lowest, phase, normal)
    res = MinLightsResult(False, None, checked=checked)
    if prev is not None:
        res.failing_min_count, res.failing_phase_deg, res.failing_normal = prev
    return res
