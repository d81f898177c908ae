"""Report document assembly and serialization (JSON / CSV / gnuplot text).

JSON is the canonical, lossless form; CSV flattens the per-layer rows;
gnuplot output is whitespace-separated columns under a single comment
header, ready for `plot "file" using 1:2`.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from .errors import InputError
from .phase import PhaseReport
from .rmt import MPModel

TOOL_VERSION = "0.1.0"
FORMATS = ("json", "csv", "gnuplot")


@dataclass
class ReportDocument:
    tool_version: str = TOOL_VERSION
    config: dict = field(default_factory=dict)
    layers: list = field(default_factory=list)  # list of flat per-layer dicts
    phase: dict | None = None
    mp: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls(**json.loads(text))


def phase_to_dict(r: PhaseReport) -> dict:
    d = asdict(r)
    d["jump_layer_pair"] = list(r.jump_layer_pair)
    return d


def mp_to_dict(m: MPModel) -> dict:
    return {
        "sigma2": m.sigma2,
        "c": m.c,
        "lambda_minus": m.lambda_minus,
        "lambda_plus": m.lambda_plus,
        "mass_at_zero": m.mass_at_zero,
    }


def emit_report(doc: ReportDocument, fmt: str = "json") -> bytes:
    if fmt not in FORMATS:
        raise InputError(f"unknown report format {fmt!r}; choose from {FORMATS}")
    if fmt == "json":
        return (doc.to_json() + "\n").encode("utf-8")

    columns = []
    for row in doc.layers:
        for key in row:
            if key not in columns:
                columns.append(key)

    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(columns)
        for row in doc.layers:
            w.writerow([row.get(c, "") for c in columns])
        return buf.getvalue().encode("utf-8")

    # gnuplot: one comment header line, then whitespace-separated rows
    lines = ["# " + " ".join(_gnuplot_cell(c) for c in columns)
             if columns else "# (no per-layer rows)"]
    for row in doc.layers:
        lines.append(" ".join(_gnuplot_cell(row.get(c, "nan")) for c in columns))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _gnuplot_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return "nan"
    return str(v).replace(" ", "_")
