"""JSON and CSV encodings of waves, spectra and verdicts.

JSON floats are written with Python's shortest round-trip representation,
so a value read back is bit-identical to the one written. CSV cells carry
ten significant digits. Every JSON document starts with ``schema_version``.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .wave import Branch, PeriodicWave, WaveParams, wave_residual

SCHEMA_VERSION = 1
CSV_DIGITS = 10


def _clean(obj):
    """Recursively turn numpy scalars/arrays into plain JSON-able values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, Branch):
        return obj.value
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(kind, payload):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(_clean(payload))
    return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, kind, payload):
    path = Path(path)
    path.write_text(dumps(kind, payload))
    return path


def read_json(path, kind=None):
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    if kind is not None and doc.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind} document, found {doc.get('kind')!r}")
    return doc


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (str, Branch)):
        return getattr(x, "value", x)
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.{CSV_DIGITS}g}"


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


# ---------------------------------------------------------------------------
# documents


def wave_to_dict(wave):
    P = wave.params
    fh = wave.fourier
    return {
        "params": {"p": P.p, "c": P.c, "L": P.L, "branch": P.branch.value, "B": P.B},
        "grid": {"N": wave.N, "phi": wave.phi},
        "fourier": {"re": fh.real, "im": fh.imag},
        "residual": wave.residual,
    }


def wave_from_dict(doc):
    pr = doc["params"]
    params = WaveParams(pr["p"], pr["c"], pr["L"], pr["branch"], pr["B"])
    phi = np.asarray(doc["grid"]["phi"], dtype=float)
    if phi.size != doc["grid"]["N"]:
        raise ValueError("grid size does not match the stored samples")
    w = PeriodicWave(params, phi, float(doc["residual"]), {"source": "json"})
    w.residual = wave_residual(w)
    return w


def save_wave(path, wave):
    return write_json(path, "wave", wave_to_dict(wave))


def load_wave(path):
    return wave_from_dict(read_json(path, "wave"))


def spectrum_to_dict(rep):
    return {
        "origin": rep.origin,
        "k": rep.k,
        "N": rep.N,
        "eigenvalues": [{"re": z.real, "im": z.imag} for z in rep.eigenvalues],
        "neg_count": rep.neg_count,
        "kernel_dim": rep.kernel_dim,
        "zero_tol": rep.zero_tol,
    }


def growth_rows(curve):
    return curve.rows()


def verdict_to_dict(v, wave=None):
    g = v.growth
    out = {
        "verdict": v.verdict.value,
        "criterion": v.criterion,
        "nR0": v.nR0,
        "k0": v.k0,
        "max_growth": v.max_growth,
        "lambda_at_max": g.lambda_at_max,
        "k_at_max": g.k_at_max,
        "scale": v.scale,
        "threshold": v.threshold,
        "mass_derivative": v.mass_derivative,
        "index": None if v.index is None else v.index.as_dict(),
        "growth": {"k": g.k_samples, "max_re_lambda": g.max_re_lambda, "im_at_max": g.im_at_max},
        "notes": list(v.notes),
    }
    if wave is not None:
        out = {"params": wave_to_dict(wave)["params"], **out}
    return out
