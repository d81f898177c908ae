"""File formats: the LGA1 binary activation container, profile CSVs,
flat key=value config files, and plain-text matrix/vector loaders.

LGA1 layout (little-endian throughout):
    offset 0   magic        4 bytes  b"LGA1"
    offset 4   version      u16      (currently 1)
    offset 6   dtype code   u16      (1 = float32)
    offset 8   rows T       u32
    offset 12  cols d       u32
    offset 16  layer        u16
    offset 18  model id len u16
    offset 20  model id     UTF-8 bytes
    ...        zero padding to the next 16-byte boundary
    payload    T*d float32 values, row-major
"""

import csv
import io
import struct

import numpy as np

from .eig import ActivationMatrix
from .errors import FormatError, InputError
from .phase import DepthProfile, make_profile

MAGIC = b"LGA1"
VERSION = 1
DTYPE_F32 = 1
_HEAD = struct.Struct("<4sHHIIHH")


def write_activations(X: ActivationMatrix, path) -> None:
    """Serialize a batch as LGA1; values are stored as float32."""
    model = X.model_id.encode("utf-8")
    if len(model) > 0xFFFF:
        raise InputError("model id too long for the header")
    header = _HEAD.pack(MAGIC, VERSION, DTYPE_F32, X.T, X.d, X.layer, len(model))
    header += model
    header += b"\x00" * (-len(header) % 16)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(X.data, dtype="<f4").tobytes())


def read_activations(path) -> ActivationMatrix:
    """Parse an LGA1 file; format errors carry the offending byte offset."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEAD.size:
        raise FormatError(f"file truncated at byte {len(blob)}: header needs {_HEAD.size}")
    magic, version, dtype, rows, cols, layer, id_len = _HEAD.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at byte 4")
    if dtype != DTYPE_F32:
        raise FormatError(f"unsupported dtype code {dtype} at byte 6")
    id_end = _HEAD.size + id_len
    if len(blob) < id_end:
        raise FormatError(f"file truncated at byte {len(blob)}: model id ends at {id_end}")
    model_id = blob[_HEAD.size:id_end].decode("utf-8")
    payload_off = id_end + (-id_end % 16)
    expected = payload_off + rows * cols * 4
    if len(blob) != expected:
        raise FormatError(
            f"payload size mismatch at byte {payload_off}: "
            f"expected {expected} total bytes, file has {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f4", count=rows * cols, offset=payload_off)
    data = data.reshape(rows, cols).astype(float)
    return ActivationMatrix(data=data, layer=layer, model_id=model_id)


def add_quantization_noise(X: ActivationMatrix, s2: float, seed: int) -> ActivationMatrix:
    """Model quantization as additive i.i.d. N(0, s2) noise per entry.

    The sample covariance of the result is the input covariance plus
    approximately s2 * Id, lifting the bulk while leaving large spikes
    detectable."""
    if s2 < 0:
        raise InputError("noise variance s2 must be >= 0")
    if s2 == 0:
        return X
    rng = np.random.default_rng(seed)
    noisy = X.data + rng.standard_normal(X.data.shape) * np.sqrt(s2)
    return ActivationMatrix(data=noisy, layer=X.layer, model_id=X.model_id)


_PROFILE_COLUMNS = ("model", "layer", "omega")


def read_profile_csv(path) -> dict:
    """Parse "model,layer,omega[,var][,n]" rows into one profile per model.

    Parse and validation errors carry 1-based line numbers.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise FormatError("empty profile CSV") from None
        for col in _PROFILE_COLUMNS:
            if col not in header:
                raise FormatError(f"missing required column {col!r} in header")
        idx = {name: header.index(name) for name in header}
        per_model = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                model = row[idx["model"]].strip()
                layer = int(row[idx["layer"]])
                om = float(row[idx["omega"]])
                var = float(row[idx["var"]]) if "var" in idx and row[idx["var"]].strip() else 0.0
                n = int(row[idx["n"]]) if "n" in idx and row[idx["n"]].strip() else 1
            except (ValueError, IndexError) as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
            if not (0.0 <= om < 1.0):
                raise FormatError(f"line {lineno}: omega {om} outside [0, 1)")
            if layer < 0:
                raise FormatError(f"line {lineno}: negative layer index")
            if var < 0:
                raise FormatError(f"line {lineno}: negative variance")
            rows = per_model.setdefault(model, {})
            if layer in rows:
                raise FormatError(f"line {lineno}: duplicate (model, layer) = ({model}, {layer})")
            rows[layer] = (om, var, n)
    profiles = {}
    for model, rows in per_model.items():
        L = max(rows) + 1
        profiles[model] = make_profile(
            model, L, [(l, om, var, n) for l, (om, var, n) in sorted(rows.items())]
        )
    return profiles


def write_profile_csv(profiles, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["model", "layer", "omega", "var", "n"])
    for prof in profiles:
        for p in prof.points:
            w.writerow([prof.model_id, p.layer, f"{p.mean_omega:.10g}",
                        f"{p.var_omega:.10g}", p.n])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_config(path, schema: dict) -> dict:
    """Flat "key = value" config file; unknown keys are errors.

    ``schema`` maps key -> converter; converters may raise ValueError.
    """
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in schema:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
            if key in out:
                raise FormatError(f"line {lineno}: duplicate key {key!r}")
            try:
                out[key] = schema[key](value)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return out


def load_matrix(path) -> np.ndarray:
    try:
        M = np.loadtxt(path, dtype=float, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return M


def load_vector(path) -> np.ndarray:
    try:
        v = np.loadtxt(path, dtype=float, ndmin=1)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return v.reshape(-1)
