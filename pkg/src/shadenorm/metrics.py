"""Angular-error statistics, boundary error, total variation, PSNR and SSIM."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .core import NormalMap
from .errors import EmptyInputError, StructuralError

THRESHOLDS = (3.0, 5.0, 7.5, 11.25, 22.5, 30.0)
PSNR_CAP = 99.0


@dataclass
class MetricsReport:
    mae_deg: float
    median_deg: float
    pct_below: dict
    n_pixels: int
    sne_deg: Optional[float] = None
    tv: Optional[dict] = None
    psnr_db: Optional[float] = None
    ssim: Optional[float] = None
    extra: dict = field(default_factory=dict)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise StructuralError(f"dimension mismatch: {a.shape} vs {b.shape}")


def angular_error_map(est: NormalMap, gt: NormalMap):
    """Per-pixel angle in degrees; nan outside the intersection of both masks."""
    _same_shape(est.normals, gt.normals)
    dot = np.clip(np.einsum("hwc,hwc->hw", est.normals, gt.normals), -1.0, 1.0)
    err = np.degrees(np.arccos(dot))
    return np.where(est.mask & gt.mask, err, np.nan)


def mae_stats(error_map, thresholds=THRESHOLDS):
    e = np.asarray(error_map, dtype=np.float64)
    e = e[np.isfinite(e)]
    if e.size == 0:
        raise EmptyInputError("no pixels to evaluate")
    # np.median averages the two middle values for even counts
    pct = {t: 100.0 * np.count_nonzero(e < t) / e.size for t in thresholds}
    return {"mean": float(np.mean(e)), "median": float(np.median(e)), "pct_below": pct,
            "n": int(e.size)}


def evaluate_normals(est, gt, boundary=None):
    """MAE statistics of ``est`` against ``gt``, with SNE when a boundary is given."""
    st = mae_stats(angular_error_map(est, gt))
    rep = MetricsReport(st["mean"], st["median"], st["pct_below"], st["n"])
    if boundary is not None:
        rep.sne_deg = sne(est, gt, boundary)
    return rep


_CROSS = ndimage.generate_binary_structure(2, 1)


def extract_boundary(gt: NormalMap, angle_thresh_deg=15.0, dilate_px=1):
    """Geometric boundary of a ground-truth normal map.

    A masked-in pixel is a seed when a 4-neighbour is masked out, or when
    the angle to its right or lower neighbour exceeds ``angle_thresh_deg``
    (one seed per jump, so a straight crease gives a 1-px seam). Seeds are
    dilated by ``dilate_px`` with a 4-connected element and clipped to the mask.
    """
    n, m = gt.normals, gt.mask
    h, w = m.shape
    cos_t = np.cos(np.radians(angle_thresh_deg))
    seed = np.zeros_like(m)

    padded = np.pad(m, 1, mode="edge")
    out_nbr = ~(padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:])
    seed |= m & out_nbr

    dx = np.einsum("hwc,hwc->hw", n[:, :-1], n[:, 1:])
    jump_x = m[:, :-1] & m[:, 1:] & (dx < cos_t)
    seed[:, :-1] |= jump_x
    dy = np.einsum("hwc,hwc->hw", n[:-1], n[1:])
    jump_y = m[:-1] & m[1:] & (dy < cos_t)
    seed[:-1] |= jump_y

    if dilate_px > 0:
        seed = ndimage.binary_dilation(seed, structure=_CROSS, iterations=int(dilate_px))
    return seed & m


def sne(est, gt, boundary):
    e = angular_error_map(est, gt)
    sel = boundary & np.isfinite(e)
    if not np.any(sel):
        raise EmptyInputError(
            f"boundary is empty after masking ({int(boundary.sum())} boundary pixels, "
            f"{int(np.isfinite(e).sum())} evaluable pixels)")
    return float(np.mean(e[sel]))


def encode_normals(normals: NormalMap):
    """Colour encoding (n + 1) / 2 used for display and for TV comparisons."""
    return (normals.normals + 1.0) / 2.0


def tv(values, mask):
    """Mean first-order gradient magnitude.

    ``values`` is (H, W) or (H, W, C). Forward differences are taken at
    masked-in pixels whose right and lower neighbours are also masked in;
    the mean runs over those pixels and all channels.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == 2:
        v = v[..., None]
    m = np.asarray(mask, dtype=bool)
    if v.shape[:2] != m.shape:
        raise StructuralError(f"mask shape {m.shape} does not match values {v.shape[:2]}")
    ok = m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1]
    if not np.any(ok):
        raise EmptyInputError("no pixel has masked-in right and lower neighbours")
    dx = v[:-1, 1:] - v[:-1, :-1]
    dy = v[1:, :-1] - v[:-1, :-1]
    mag = np.sqrt(dx * dx + dy * dy)
    return float(mag[ok].mean())


def tv_normal_map(normals: NormalMap):
    return tv(encode_normals(normals), normals.mask)


def tv_sequence(seq):
    """TV averaged over the frames of a shading sequence."""
    return float(np.mean([tv(f, seq.mask) for f in seq.frames]))


def psnr(est, gt, mask=None):
    est = np.asarray(est, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _same_shape(est, gt)
    m = np.ones(gt.shape, bool) if mask is None else np.asarray(mask, bool)
    if not np.any(m):
        raise EmptyInputError("empty mask")
    mse = float(np.mean((est[m] - gt[m]) ** 2))
    if mse < 1e-12:
        return PSNR_CAP
    return float(min(10.0 * np.log10(1.0 / mse), PSNR_CAP))


def gaussian_window(size=11, sigma=1.5):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img, g):
    # separable correlation keeping only windows fully inside the image
    k = g.size
    rows = np.lib.stride_tricks.sliding_window_view(img, k, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(rows, k, axis=1) @ g


def ssim(est, gt, mask=None, win=11, sigma=1.5, k1=0.01, k2=0.03, data_range=1.0):
    """Mean SSIM over Gaussian windows lying fully inside ``mask``."""
    x = np.asarray(est, dtype=np.float64)
    y = np.asarray(gt, dtype=np.float64)
    _same_shape(x, y)
    m = np.ones(y.shape, bool) if mask is None else np.asarray(mask, bool)
    if min(y.shape) < win:
        raise EmptyInputError(f"frame {y.shape} smaller than the {win}x{win} window")
    inside = _filter_valid(m.astype(np.float64), np.ones(win)) >= win * win - 0.5
    if not np.any(inside):
        raise EmptyInputError("no SSIM window lies fully inside the mask")

    g = gaussian_window(win, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    s = ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))
    return float(s[inside].mean())


def shading_scores(est_seq, gt_seq):
    """Per-frame PSNR and SSIM of two aligned sequences over their common mask."""
    if len(est_seq) != len(gt_seq):
        raise StructuralError(f"{len(est_seq)} vs {len(gt_seq)} frames")
    _same_shape(est_seq.mask, gt_seq.mask)
    m = est_seq.mask & gt_seq.mask
    frames = []
    for a, b in zip(est_seq.frames, gt_seq.frames):
        frames.append({"psnr_db": psnr(a, b, m), "ssim": ssim(a, b, m)})
    return {
        "frames": frames,
        "mean_psnr_db": float(np.mean([f["psnr_db"] for f in frames])),
        "mean_ssim": float(np.mean([f["ssim"] for f in frames])),
    }
