"""Surface-data files, immersion exports and JSON reports.

Surface file (UTF-8 JSON)::

    {"version": 1, "c": -1 | 0 | 1,
     "chart": {"nx", "ny", "x_min", "x_max", "y_min", "y_max", "periodic_x", "periodic_y"},
     "u": [...], "phi_re": [...], "phi_im": [...], "psi_re": [...], "psi_im": [...]}

Arrays hold ``nx * ny`` numbers in row-major order, entry ``iy * nx + ix``.
Floats are written with Python's shortest round-trip representation, so
``parse_surface(emit_surface(d))`` reproduces every value bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .chart import ConformalChart, FieldNorms
from .reconstruction import Immersion
from .surface_data import SurfaceData

FORMAT_VERSION = 1
ARRAYS = ("u", "phi_re", "phi_im", "psi_re", "psi_im")
CHART_KEYS = ("nx", "ny", "x_min", "x_max", "y_min", "y_max", "periodic_x", "periodic_y")


class SurfaceFileError(ValueError):
    """Input error with a stable ``code``: unreadable, malformed, length_mismatch, invalid_c or non_finite."""

    CODES = ("unreadable", "malformed", "length_mismatch", "invalid_c", "non_finite")

    def __init__(self, code: str, message: str):
        assert code in self.CODES
        super().__init__(f"{code}: {message}")
        self.code = code


def _reject_constant(name):
    raise SurfaceFileError("non_finite", f"literal {name} is not a finite number")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _chart_from(doc) -> ConformalChart:
    if not isinstance(doc, dict):
        raise SurfaceFileError("malformed", "'chart' must be an object")
    missing = [k for k in CHART_KEYS if k not in doc]
    if missing:
        raise SurfaceFileError("malformed", f"chart lacks {', '.join(missing)}")
    if not (_is_int(doc["nx"]) and _is_int(doc["ny"])):
        raise SurfaceFileError("malformed", "chart nx and ny must be integers")
    for k in ("x_min", "x_max", "y_min", "y_max"):
        if not _is_num(doc[k]):
            raise SurfaceFileError("malformed", f"chart {k} must be a number")
        if not math.isfinite(doc[k]):
            raise SurfaceFileError("non_finite", f"chart {k} is not finite")
    for k in ("periodic_x", "periodic_y"):
        if not isinstance(doc[k], bool):
            raise SurfaceFileError("malformed", f"chart {k} must be true or false")
    try:
        return ConformalChart(doc["nx"], doc["ny"], float(doc["x_min"]), float(doc["x_max"]),
                              float(doc["y_min"]), float(doc["y_max"]), doc["periodic_x"], doc["periodic_y"])
    except ValueError as exc:
        raise SurfaceFileError("malformed", f"invalid chart: {exc}") from None


def parse_surface(text: str) -> SurfaceData:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SurfaceFileError("malformed", f"not a JSON document ({exc})") from None
    if not isinstance(doc, dict):
        raise SurfaceFileError("malformed", "top level must be an object")
    if doc.get("version") != FORMAT_VERSION or isinstance(doc.get("version"), bool):
        raise SurfaceFileError("malformed", f"unsupported version {doc.get('version')!r}")
    for k in ("c", "chart") + ARRAYS:
        if k not in doc:
            raise SurfaceFileError("malformed", f"missing key '{k}'")
    c = doc["c"]
    if not _is_int(c) or c not in (-1, 0, 1):
        raise SurfaceFileError("invalid_c", f"c must be -1, 0 or 1, got {c!r}")
    chart = _chart_from(doc["chart"])
    n = chart.nx * chart.ny
    arrays = {}
    for k in ARRAYS:
        v = doc[k]
        if not isinstance(v, list):
            raise SurfaceFileError("malformed", f"'{k}' must be an array")
        if len(v) != n:
            raise SurfaceFileError("length_mismatch", f"'{k}' has {len(v)} entries, expected nx*ny = {n}")
        if not all(_is_num(e) for e in v):
            raise SurfaceFileError("malformed", f"'{k}' must contain only numbers")
        a = np.array(v, dtype=float)
        if not np.all(np.isfinite(a)):
            i = int(np.argmin(np.isfinite(a)))
            raise SurfaceFileError("non_finite", f"'{k}' entry {i} is not finite")
        arrays[k] = a.reshape(chart.ny, chart.nx)
    return SurfaceData(chart, c, arrays["u"], _complex(arrays["phi_re"], arrays["phi_im"]),
                       _complex(arrays["psi_re"], arrays["psi_im"]))


def _complex(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    # ``re + 1j * im`` would turn signed zeros into +0.0
    out = np.empty(re.shape, dtype=complex)
    out.real = re
    out.imag = im
    return out


def parse_surface_file(path) -> SurfaceData:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SurfaceFileError("unreadable", f"cannot read {path}: {exc}") from None
    return parse_surface(text)


def _floats(a: np.ndarray) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def emit_surface(data: SurfaceData) -> str:
    doc = {
        "version": FORMAT_VERSION,
        "c": int(data.c),
        "chart": data.chart.to_dict(),
        "u": _floats(data.u),
        "phi_re": _floats(data.phi.real),
        "phi_im": _floats(data.phi.imag),
        "psi_re": _floats(data.psi.real),
        "psi_im": _floats(data.psi.imag),
    }
    return json.dumps(doc, allow_nan=False) + "\n"


def write_surface_file(path, data: SurfaceData) -> None:
    Path(path).write_text(emit_surface(data), encoding="utf-8")


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def emit_immersion_csv(imm: Immersion, tol: float = 1e-3) -> str:
    """One row per grid point (row-major) with chart coordinates and ambient coordinates.

    For ``c = +-1`` the projective columns rescale each lift value onto its
    quadric; ``tol`` only guards against exporting something that is not a
    lift (integration drift is reported separately).
    """
    F = imm.complex_points
    cols = ["x", "y"]
    if imm.c == 0:
        cols += ["f1_re", "f1_im", "f2_re", "f2_im"]
        parts = [F]
    else:
        cols += [f"F{k}_{p}" for k in range(3) for p in ("re", "im")]
        cols += [f"p{k}_{p}" for k in range(3) for p in ("re", "im")]
        parts = [F, imm.projective(tol)]
    X, Y = imm.chart.grid()
    lines = [",".join(cols)]
    for iy in range(imm.chart.ny):
        for ix in range(imm.chart.nx):
            row = [X[iy, ix], Y[iy, ix]]
            for P in parts:
                for w in P[iy, ix]:
                    row += [w.real, w.imag]
            lines.append(",".join(_g17(v) for v in row))
    return "\n".join(lines) + "\n"


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def make_report(command: str, input, tolerance: float, norms: dict, verdicts: dict, exit: int | None = None,
                details: dict | None = None) -> dict:
    """Report document; ``exit`` defaults to 0 if every verdict holds, else 1.

    Non-finite norms are stored as ``null``. ``details`` is an optional
    free-form object for structured results (umbilic lists, notes).
    """
    out_norms = {}
    for k, n in norms.items():
        if isinstance(n, FieldNorms):
            n = {"linf": n.linf, "l2": n.l2}
        out_norms[k] = {"linf": _finite_or_none(n["linf"]), "l2": _finite_or_none(n["l2"])}
    verdicts = {k: bool(v) for k, v in verdicts.items()}
    if exit is None:
        exit = 0 if all(verdicts.values()) else 1
    rep = {
        "command": command,
        "input": input,
        "tolerance": _finite_or_none(tolerance) if tolerance is not None else None,
        "norms": out_norms,
        "verdicts": verdicts,
        "exit": int(exit),
    }
    if details:
        rep["details"] = details
    return rep


def emit_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


REPORT_KEYS = ("command", "input", "tolerance", "norms", "verdicts", "exit")


def validate_report(doc) -> None:
    """Raise ``ValueError`` unless ``doc`` follows the report schema."""
    if not isinstance(doc, dict):
        raise ValueError("report must be an object")
    missing = [k for k in REPORT_KEYS if k not in doc]
    if missing:
        raise ValueError(f"report lacks {', '.join(missing)}")
    if not isinstance(doc["command"], str):
        raise ValueError("'command' must be a string")
    if doc["tolerance"] is not None and not _is_num(doc["tolerance"]):
        raise ValueError("'tolerance' must be a number")
    for name, n in doc["norms"].items():
        if not (isinstance(n, dict) and set(n) == {"linf", "l2"}):
            raise ValueError(f"norm '{name}' must have exactly linf and l2")
    if not all(isinstance(v, bool) for v in doc["verdicts"].values()):
        raise ValueError("verdicts must be booleans")
    if doc["exit"] not in (0, 1, 2):
        raise ValueError("'exit' must be 0, 1 or 2")


def merge_reports(reports: list[dict], inputs: list[str]) -> dict:
    """Combine reports; names are prefixed with ``<command>[<position>].``."""
    norms, verdicts, tols, worst = {}, {}, {}, 0
    for i, rep in enumerate(reports):
        validate_report(rep)
        pre = f"{rep['command']}[{i}]."
        norms.update({pre + k: v for k, v in rep["norms"].items()})
        verdicts.update({pre + k: v for k, v in rep["verdicts"].items()})
        tols[pre[:-1]] = rep["tolerance"]
        worst = max(worst, rep["exit"])
    rep = make_report("report", inputs, None, norms, verdicts, exit=worst, details={"tolerances": tols})
    return rep
