"""Forward rendering of albedo-free shading frames and the signed codec."""
from dataclasses import dataclass

import numpy as np

from .core import LightPath, NormalMap
from .errors import DomainError, StructuralError

# Shading values live on a fixed-point grid of step 2**-52 (float64
# resolution at 1). On that grid 2s - 1 and (v + 1) / 2 are both exact.
GRID = 2.0 ** 52


def snap(values):
    """Round values to the 2**-52 fixed-point grid (exact power-of-two scaling)."""
    return np.round(np.asarray(values, dtype=np.float64) * GRID) / GRID


@dataclass
class ShadingSequence:
    """``frames`` has shape (f, H, W); all frames share ``mask``.

    ``signed`` marks sequences mapped to [-1, 1] by ``encode_signed``.
    """
    frames: np.ndarray
    mask: np.ndarray
    lights: LightPath
    signed: bool = False

    def __post_init__(self):
        fr = np.asarray(self.frames, dtype=np.float64)
        m = np.asarray(self.mask, dtype=bool)
        if fr.ndim != 3:
            raise StructuralError(f"frames must have shape (f, H, W), got {fr.shape}")
        if fr.shape[1:] != m.shape:
            raise StructuralError(f"mask shape {m.shape} does not match frames {fr.shape[1:]}")
        if fr.shape[0] != len(self.lights):
            raise StructuralError(
                f"{fr.shape[0]} frames but {len(self.lights)} light directions")
        self.frames = fr
        self.mask = m

    def __len__(self):
        return self.frames.shape[0]

    @property
    def shape(self):
        return self.mask.shape


def shade(normals, mask, directions):
    """Clamped dot products max(n . l_i, 0), zero outside ``mask``.

    Works on raw arrays: normals (H, W, 3), directions (f, 3). No hemisphere
    checks, which keeps it usable on rotated configurations.
    """
    s = np.einsum("hwc,fc->fhw", normals, directions)
    np.maximum(s, 0.0, out=s)
    s[:, ~mask] = 0.0
    return s


def render_shading(normals: NormalMap, lights: LightPath) -> ShadingSequence:
    normals.validate()
    frames = shade(normals.normals, normals.mask, lights.directions)
    # guards against 1 + eps from rounding in the dot product
    np.minimum(frames, 1.0, out=frames)
    frames = snap(frames)
    return ShadingSequence(frames, normals.mask.copy(), lights)


def encode_signed(seq: ShadingSequence) -> ShadingSequence:
    """Map [0, 1] shadings to [-1, 1] via 2s - 1 (background becomes -1)."""
    if seq.signed:
        raise DomainError("sequence is already signed")
    f = seq.frames
    if f.min() < 0.0 or f.max() > 1.0:
        raise DomainError("encode_signed expects values in [0, 1]")
    return ShadingSequence(snap(f) * 2.0 - 1.0, seq.mask.copy(), seq.lights, signed=True)


def decode_signed(seq: ShadingSequence) -> ShadingSequence:
    """Inverse of ``encode_signed``: (v + 1) / 2.

    Exact inverse for values on the fixed-point grid: 2s - 1 of a multiple
    of 2**-52 is a multiple of 2**-51 in [-1, 1], which float64 represents
    exactly, and the way back only adds 1 and halves.
    """
    f = seq.frames
    if f.min() < -1.0 or f.max() > 1.0:
        raise DomainError("decode_signed expects values in [-1, 1]")
    v = np.round(f * (GRID / 2)) / (GRID / 2)
    return ShadingSequence((v + 1.0) * 0.5, seq.mask.copy(), seq.lights, signed=False)
