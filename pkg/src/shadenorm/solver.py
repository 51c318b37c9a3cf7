"""Per-pixel least-squares normal recovery from shading sequences.

Each masked-in pixel solves the 3x3 normal equations
``(L_V^T L_V) n = L_V^T s_V`` over its valid frames V. ``solve_masked``
keeps only frames with shading above ``positive_threshold``; clamped zeros
carry no information about n . l beyond its sign. ``solve_naive`` keeps
every frame and so inherits the truncation bias of the clamp.
"""
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _parallel
from .core import NormalMap, RANK_RTOL
from .errors import DomainError, StructuralError

POSITIVE_THRESHOLD = 1e-4
MIN_NORM = 1e-6


class Status(IntEnum):
    OK = 0
    UNDERDETERMINED = 1
    RANK_DEFICIENT = 2
    DEGENERATE_NORM = 3
    BACKGROUND = 4  # masked out in the input, never solved


@dataclass
class SolveResult:
    normals: NormalMap
    status: np.ndarray  # (H, W) uint8 of Status codes
    residual: np.ndarray  # (H, W) RMS residual of the valid equations, nan where not ok
    raw_norm: np.ndarray  # (H, W) |n| before normalization, nan where not solved
    stats: dict = field(default_factory=dict)


def _solve_chunk(s, w, lights):
    # s, w: (P, f) shadings and 0/1 weights
    a = np.einsum("pf,fi,fj->pij", w, lights, lights)
    b = np.einsum("pf,pf,fi->pi", w, s, lights)
    count = w.sum(axis=1)

    status = np.full(s.shape[0], Status.OK, dtype=np.uint8)
    status[count < 3] = Status.UNDERDETERMINED

    # eigenvalues of L_V^T L_V are the squared singular values of L_V
    ev = np.linalg.eigvalsh(a)
    lo = np.sqrt(np.clip(ev[:, 0], 0.0, None))
    hi = np.sqrt(np.clip(ev[:, -1], 0.0, None))
    rank_bad = ~(lo > RANK_RTOL * hi)
    status[(status == Status.OK) & rank_bad] = Status.RANK_DEFICIENT

    ok = status == Status.OK
    n = np.full((s.shape[0], 3), np.nan)
    if np.any(ok):
        n[ok] = np.linalg.solve(a[ok], b[ok][..., None])[..., 0]
    norm = np.linalg.norm(n, axis=1)
    status[ok & (norm < MIN_NORM)] = Status.DEGENERATE_NORM

    ok = status == Status.OK
    pred = n @ lights.T
    sq = np.where(w > 0, (pred - s) ** 2, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        resid = np.sqrt(sq / count)
    unit = np.where(ok[:, None], n / np.where(ok, norm, 1.0)[:, None], 0.0)
    resid = np.where(ok, resid, np.nan)
    return unit, status, resid, norm


def _solve(seq, weights_fn):
    if seq.signed:
        raise DomainError("decode signed sequences before solving")
    f, h, w = seq.frames.shape
    lights = seq.lights.directions
    if lights.shape[0] != f:
        raise StructuralError(f"{f} frames but {lights.shape[0]} light directions")

    mask = seq.mask
    s = seq.frames[:, mask].T  # (P, f)
    wts = weights_fn(s).astype(np.float64)
    unit, st, resid, norm = _parallel.map_rows(
        lambda a, b: _solve_chunk(a, b, lights), s, wts,
        out_dtypes=(np.float64, np.uint8, np.float64, np.float64))

    normals = np.zeros((h, w, 3))
    status = np.full((h, w), Status.BACKGROUND, dtype=np.uint8)
    residual = np.full((h, w), np.nan)
    raw_norm = np.full((h, w), np.nan)
    if s.shape[0]:
        normals[mask] = unit
        status[mask] = st
        residual[mask] = resid
        raw_norm[mask] = norm

    ok = status == Status.OK
    stats = {s_.name.lower(): int(np.count_nonzero(status[mask] == s_))
             for s_ in Status if s_ is not Status.BACKGROUND}
    stats["masked_in"] = int(mask.sum())
    stats["mean_residual"] = float(residual[ok].mean()) if ok.any() else None
    return SolveResult(NormalMap(normals, ok), status, residual, raw_norm, stats)


def solve_masked(seq, positive_threshold=POSITIVE_THRESHOLD):
    """Least squares over frames whose shading exceeds ``positive_threshold``."""
    return _solve(seq, lambda s: s > positive_threshold)


def solve_naive(seq):
    """Least squares over all frames, clamped zeros included."""
    return _solve(seq, lambda s: np.ones_like(s, dtype=bool))
