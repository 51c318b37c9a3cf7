"""File formats: 16-bit PNG normal maps and masks, shading-sequence
directories (16-bit PNG or PFM frames plus a JSON manifest), light paths
and reports as JSON, and CSV rows for tables.

PNG sample values are big-endian by the PNG standard. PFM frames are
written little-endian (negative scale) and read in either byte order.
"""
import csv
import io as _io
import json
import re
from pathlib import Path

import jsonschema
import numpy as np
import png

from .core import LightPath, NormalMap, RingSpec
from .errors import SchemaError, StructuralError
from .render import ShadingSequence, decode_signed, encode_signed

SCHEMA_VERSION = 1
MAX16 = 65535
MID_GRAY = 32768


# -- PNG --------------------------------------------------------------------

def _quantize16(x):
    return np.floor(np.clip(x, 0.0, 1.0) * MAX16 + 0.5).astype(np.uint16)


def _write_png(path, arr, bitdepth, greyscale):
    h, w = arr.shape[:2]
    planes = 1 if greyscale else arr.shape[2]
    rows = arr.reshape(h, w * planes)
    writer = png.Writer(w, h, greyscale=greyscale, bitdepth=bitdepth, compression=6)
    with open(path, "wb") as fh:
        writer.write(fh, rows.tolist() if arr.dtype == np.uint16 else rows)


def _read_png(path):
    try:
        w, h, rows, info = png.Reader(filename=str(path)).read()
        data = np.vstack([np.asarray(r, dtype=np.uint32) for r in rows])
    except (png.Error, OSError, ValueError) as exc:
        raise SchemaError(f"cannot read PNG {path}: {exc}") from exc
    planes = info["planes"]
    return data.reshape(h, w, planes) if planes > 1 else data.reshape(h, w), info


def write_mask(path, mask):
    _write_png(path, np.where(mask, 255, 0).astype(np.uint8), 8, True)


def read_mask(path):
    data, info = _read_png(path)
    if data.ndim != 2:
        raise SchemaError(f"mask {path} must be single-channel greyscale")
    vals = np.unique(data)
    top = (1 << info["bitdepth"]) - 1
    if not set(vals.tolist()) <= {0, top}:
        raise SchemaError(f"mask {path} must contain only 0 and {top}")
    return data == top


def mask_path_for(path):
    """Sidecar mask file used when no explicit mask path is given: x.png -> x_mask.png."""
    p = Path(path)
    return p.with_name(p.stem + "_mask.png")


def write_normal_map(path, normals: NormalMap, mask_path=None):
    """16-bit RGB PNG with c = round((n + 1) / 2 * 65535); masked-out pixels mid-gray."""
    q = _quantize16((normals.normals + 1.0) / 2.0)
    q[~normals.mask] = MID_GRAY
    _write_png(path, q, 16, False)
    mask_path = mask_path_for(path) if mask_path is None else mask_path
    write_mask(mask_path, normals.mask)
    return Path(path), Path(mask_path)


def decode_normal_pixels(q):
    """Undo the 16-bit colour encoding without renormalizing."""
    return q.astype(np.float64) / MAX16 * 2.0 - 1.0


def read_normal_map(path, mask_path=None, renormalize=True):
    data, info = _read_png(path)
    if data.ndim != 3 or data.shape[2] != 3 or info["bitdepth"] != 16:
        raise SchemaError(f"normal map {path} must be a 16-bit RGB PNG")
    mask_path = mask_path_for(path) if mask_path is None else mask_path
    mask = read_mask(mask_path)
    if mask.shape != data.shape[:2]:
        raise StructuralError(f"mask {mask.shape} and normal map {data.shape[:2]} differ in size")
    n = decode_normal_pixels(data)
    if renormalize:
        norm = np.linalg.norm(n, axis=2, keepdims=True)
        n = np.where(norm > 0, n / np.where(norm > 0, norm, 1.0), 0.0)
    return NormalMap(n, mask)


def write_frame_png(path, frame):
    _write_png(path, _quantize16(frame), 16, True)


def read_frame_png(path):
    data, info = _read_png(path)
    if data.ndim != 2 or info["bitdepth"] != 16:
        raise SchemaError(f"shading frame {path} must be a 16-bit greyscale PNG")
    return data.astype(np.float64) / MAX16


# -- PFM --------------------------------------------------------------------

def write_pfm(path, image):
    """Single-channel ("Pf") or RGB ("PF") float map, little-endian, bottom row first."""
    a = np.asarray(image, dtype="<f4")
    if a.ndim == 2:
        tag = b"Pf"
    elif a.ndim == 3 and a.shape[2] == 3:
        tag = b"PF"
    else:
        raise StructuralError(f"PFM supports (H, W) or (H, W, 3), got {a.shape}")
    h, w = a.shape[:2]
    with open(path, "wb") as fh:
        fh.write(tag + b"\n" + f"{w} {h}\n".encode() + b"-1.0\n")
        fh.write(np.ascontiguousarray(a[::-1]).tobytes())


_PFM_HEADER = re.compile(rb"^(P[Ff])\s+(\d+)\s+(\d+)\s+(\S+)\s")


def read_pfm(path):
    raw = Path(path).read_bytes()
    mt = _PFM_HEADER.match(raw)
    if not mt:
        raise SchemaError(f"{path} is not a PFM file")
    channels = 3 if mt.group(1) == b"PF" else 1
    w, h = int(mt.group(2)), int(mt.group(3))
    try:
        scale = float(mt.group(4))
    except ValueError as exc:
        raise SchemaError(f"bad PFM scale in {path}") from exc
    dtype = "<f4" if scale < 0 else ">f4"
    body = raw[mt.end():]
    need = w * h * channels * 4
    if len(body) != need:
        raise SchemaError(f"PFM {path}: expected {need} data bytes, found {len(body)}")
    a = np.frombuffer(body, dtype=dtype).reshape((h, w, channels) if channels == 3 else (h, w))
    return a[::-1].astype(np.float32)


# -- JSON helpers -------------------------------------------------------------

def dumps(obj):
    """Deterministic JSON: fixed key order as given, shortest round-trip floats."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def _load_json(path, schema, what):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {what} {path}: {exc}") from exc
    validate(doc, schema, what)
    return doc


def validate(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        ver = doc.get("version") if isinstance(doc, dict) else None
        raise SchemaError(f"invalid {what}: {exc.message}", version=ver) from exc


_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

LIGHTPATH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "directions", "provenance"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "directions": {"type": "array", "items": _VEC3, "minItems": 1},
        "provenance": {
            "oneOf": [
                {"type": "object", "additionalProperties": False,
                 "required": ["type", "count", "elevation_deg", "phase_deg"],
                 "properties": {"type": {"const": "ring"}, "count": {"type": "integer"},
                                "elevation_deg": {"type": "number"},
                                "phase_deg": {"type": "number"}}},
                {"type": "object", "additionalProperties": False, "required": ["type"],
                 "properties": {"type": {"const": "custom"}}},
            ]
        },
    },
}


def lightpath_to_dict(lights: LightPath):
    p = lights.provenance
    prov = ({"type": "ring", "count": int(p.count), "elevation_deg": float(p.elevation_deg),
             "phase_deg": float(p.phase_deg)} if p is not None else {"type": "custom"})
    return {"version": SCHEMA_VERSION,
            "directions": [[float(c) for c in d] for d in lights.directions],
            "provenance": prov}


def lightpath_from_dict(doc):
    validate(doc, LIGHTPATH_SCHEMA, "light path")
    prov = doc["provenance"]
    spec = None
    if prov["type"] == "ring":
        spec = RingSpec(prov["count"], prov["elevation_deg"], prov["phase_deg"])
    return LightPath(np.array(doc["directions"], dtype=np.float64), provenance=spec)


def write_lightpath(path, lights):
    _write_json(path, lightpath_to_dict(lights))


def read_lightpath(path):
    return lightpath_from_dict(_load_json(path, LIGHTPATH_SCHEMA, "light path"))


# -- shading sequences ----------------------------------------------------------

MANIFEST_NAME = "manifest.json"
ENCODINGS = ("unsigned01", "signed11")

MANIFEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "lights", "frames", "encoding", "mask", "dims"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "lights": {"type": "array", "items": _VEC3, "minItems": 1},
        "frames": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "encoding": {"type": "string"},
        "mask": {"type": "string"},
        "dims": {"type": "array", "items": {"type": "integer", "minimum": 1},
                 "minItems": 2, "maxItems": 2},
    },
}


def write_sequence(directory, seq: ShadingSequence, encoding="unsigned01", fmt="png"):
    """Write frames, mask and manifest into ``directory``; returns the manifest path.

    ``signed11`` stores encode_signed(seq) as ((v + 1) / 2) * 65535 in PNG,
    or v itself in PFM.
    """
    if encoding not in ENCODINGS:
        raise SchemaError(f"unknown encoding {encoding!r}")
    if fmt not in ("png", "pfm"):
        raise SchemaError(f"unknown frame format {fmt!r}")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    frames = seq.frames if encoding == "unsigned01" else encode_signed(seq).frames
    names = []
    for i, fr in enumerate(frames):
        name = f"frame_{i:03d}.{fmt}"
        if fmt == "pfm":
            write_pfm(d / name, fr)
        elif encoding == "signed11":
            write_frame_png(d / name, (fr + 1.0) / 2.0)
        else:
            write_frame_png(d / name, fr)
        names.append(name)
    write_mask(d / "mask.png", seq.mask)
    h, w = seq.shape
    manifest = {
        "version": SCHEMA_VERSION,
        "lights": [[float(c) for c in v] for v in seq.lights.directions],
        "frames": names,
        "encoding": encoding,
        "mask": "mask.png",
        "dims": [int(w), int(h)],
    }
    _write_json(d / MANIFEST_NAME, manifest)
    return d / MANIFEST_NAME


def read_sequence(directory, lights: LightPath = None):
    """Load a shading directory back into [0, 1] values.

    The manifest carries the light directions; pass ``lights`` to recover
    ring provenance when it is known.
    """
    d = Path(directory)
    man = _load_json(d / MANIFEST_NAME, MANIFEST_SCHEMA, "sequence manifest")
    if man["encoding"] not in ENCODINGS:
        raise SchemaError(f"unknown encoding tag {man['encoding']!r}", version=man["version"])
    if len(man["frames"]) != len(man["lights"]):
        raise SchemaError(f"manifest lists {len(man['frames'])} frames but "
                          f"{len(man['lights'])} lights", version=man["version"])
    w, h = man["dims"]
    frames = []
    for name in man["frames"]:
        p = d / name
        if not p.is_file():
            raise SchemaError(f"frame file {p} missing", version=man["version"])
        if p.suffix == ".pfm":
            fr = read_pfm(p).astype(np.float64)
            if fr.ndim != 2:
                raise SchemaError(f"frame {p} must be single-channel")
        elif p.suffix == ".png":
            fr = read_frame_png(p)
            if man["encoding"] == "signed11":
                fr = fr * 2.0 - 1.0
        else:
            raise SchemaError(f"unsupported frame file {p}", version=man["version"])
        if fr.shape != (h, w):
            raise StructuralError(f"frame {p} is {fr.shape}, manifest says {(h, w)}")
        frames.append(fr)
    mask = read_mask(d / man["mask"])
    if mask.shape != (h, w):
        raise StructuralError(f"mask is {mask.shape}, manifest says {(h, w)}")
    if lights is None:
        lights = LightPath(np.array(man["lights"], dtype=np.float64))
    elif not np.array_equal(lights.directions, np.array(man["lights"])):
        raise StructuralError("given light path differs from the manifest")
    signed = man["encoding"] == "signed11"
    frames = np.stack(frames)
    if signed:
        frames = np.clip(frames, -1.0, 1.0)
    seq = ShadingSequence(frames, mask, lights, signed=signed)
    return decode_signed(seq) if signed else seq


# -- reports ------------------------------------------------------------------

def _key(t):
    return f"{t:g}"


def metrics_to_dict(rep):
    out = {"mae_deg": rep.mae_deg, "median_deg": rep.median_deg,
           "pct_below": {_key(t): v for t, v in rep.pct_below.items()},
           "n_pixels": rep.n_pixels}
    for name in ("sne_deg", "tv", "psnr_db", "ssim"):
        val = getattr(rep, name)
        if val is not None:
            out[name] = val
    return out


_PCT_KEYS = ["3", "5", "7.5", "11.25", "22.5", "30"]

METRICS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mae_deg", "median_deg", "pct_below", "n_pixels"],
    "properties": {
        "mae_deg": {"type": "number"},
        "median_deg": {"type": "number"},
        "pct_below": {"type": "object", "additionalProperties": False, "required": _PCT_KEYS,
                      "properties": {k: {"type": "number"} for k in _PCT_KEYS}},
        "n_pixels": {"type": "integer"},
        "sne_deg": {"type": "number"},
        "tv": {"type": "object", "additionalProperties": {"type": "number"}},
        "psnr_db": {"type": "number"},
        "ssim": {"type": "number"},
    },
}


def metrics_from_dict(doc):
    from .metrics import MetricsReport
    validate(doc, METRICS_SCHEMA, "metrics report")
    pct = {float(k): v for k, v in doc["pct_below"].items()}
    return MetricsReport(doc["mae_deg"], doc["median_deg"], pct, doc["n_pixels"],
                         doc.get("sne_deg"), doc.get("tv"), doc.get("psnr_db"), doc.get("ssim"))


def write_metrics(path, rep):
    _write_json(path, metrics_to_dict(rep))


def read_metrics(path):
    return metrics_from_dict(_load_json(path, METRICS_SCHEMA, "metrics report"))


CSV_FIELDS = ["mae_deg", "median_deg"] + [f"pct_below_{k}" for k in _PCT_KEYS] + ["n_pixels"]


def metrics_csv_row(rep, header=False, label=None):
    d = metrics_to_dict(rep)
    row = [d["mae_deg"], d["median_deg"]] + [d["pct_below"][k] for k in _PCT_KEYS] + [d["n_pixels"]]
    fields = CSV_FIELDS
    if label is not None:
        row, fields = [label] + row, ["label"] + fields
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if header:
        wr.writerow(fields)
    wr.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def coverage_to_dict(rep):
    return {
        "min_positive_count": rep.min_positive_count,
        "histogram": {str(k): v for k, v in sorted(rep.histogram.items())},
        "worst_normal": [float(c) for c in rep.worst_normal],
        "meets_requirement": rep.meets_requirement,
        "m": rep.m,
        "grid_min": rep.grid_min,
        "mc_min": rep.mc_min,
        "illuminated_fraction": rep.illuminated_fraction,
        "sampling": {"mode": ["grid", "monte_carlo"] if rep.sampling.get("n") else ["grid"],
                     **rep.sampling},
    }


def perturbation_to_dict(rep):
    return {"clean_mae_deg": rep.clean_mae_deg, "metadata": rep.metadata, "rows": rep.rows}


def perturbation_csv(rep):
    """Appendix-style table: one row per target, one column per sigma."""
    table = rep.table()
    sigmas = sorted({r["sigma"] for r in rep.rows})
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["target"] + [f"{s:g}" for s in sigmas])
    for target, cols in table.items():
        wr.writerow([target] + [repr(cols[s]) for s in sigmas])
    return buf.getvalue()
