"""
Reading and writing pairs, fields, traces and polylines.

Structured documents are JSON. Grid data is CSV with 17 significant digits, so
every float round-trips exactly.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from dcone.exception import FieldFormatError
from dcone.fd_solver import GridSpec, ScalarField, coincidence_masks
from dcone.obstacle_model import ObstaclePair, TransformRecord

FLOAT_FORMAT = "%.17g"
FIELD_COLUMNS = ("x1", "x2", "u", "psi1", "psi2", "lower", "upper")
PAIRS_DIR = Path(__file__).parent / "pairs"


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError("Object of type {} is not JSON serializable".format(type(value).__name__))


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def dumps(data):
    """JSON text with numpy values converted and non-finite floats spelled out."""
    plain = json.loads(json.dumps(data, default=_plain))
    return json.dumps(_finite(plain), indent=2, allow_nan=False)


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data) + "\n")
    return path


def read_json(path):
    with open(path) as f:
        return json.load(f)


def pair_path(name_or_path):
    """
    Resolve a pair argument: an existing file, or the name of a shipped pair.

    :rtype: pathlib.Path
    """
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = PAIRS_DIR / "{}.json".format(name_or_path)
    if shipped.is_file():
        return shipped
    raise FileNotFoundError("No pair file or shipped pair named '{}'.".format(name_or_path))


def shipped_pairs():
    return sorted(path.stem for path in PAIRS_DIR.glob("*.json"))


def read_pair(name_or_path):
    """
    :return: The pair and, if the file carries one, its transform record.
    :rtype: tuple[ObstaclePair, TransformRecord]
    """
    data = read_json(pair_path(name_or_path))
    if not isinstance(data, dict) or not {"a1", "c1", "a2", "c2"} <= set(data):
        raise ValueError("A pair file needs at least a1, c1, a2 and c2.")
    record = TransformRecord.from_dict(data["transform"]) if "transform" in data else None
    return ObstaclePair.from_dict(data), record


def write_pair(path, pair, record=None):
    data = pair.as_dict()
    if record is not None:
        data["transform"] = record.as_dict()
    return write_json(path, data)


def write_field_csv(path, field):
    """
    One row per node, u[i, j] at (x1[i], x2[j]), x1 varying slowest.
    """
    x1, x2 = field.grid.mesh()
    table = np.column_stack(
        [
            x1.ravel(),
            x2.ravel(),
            field.u.ravel(),
            field.psi1.ravel(),
            field.psi2.ravel(),
            field.lower.ravel().astype(int),
            field.upper.ravel().astype(int),
        ]
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = [FLOAT_FORMAT] * 5 + ["%d", "%d"]
    np.savetxt(path, table, delimiter=",", header=",".join(FIELD_COLUMNS), comments="", fmt=fmt)
    return path


def _obstacle_laplacian(psi, h):
    interior = (psi[:-2, 1:-1] + psi[2:, 1:-1] + psi[1:-1, :-2] + psi[1:-1, 2:]) - 4.0 * psi[
        1:-1, 1:-1
    ]
    return float(np.median(interior) / (h * h))


def read_field_csv(path, mask_tol=0.1):
    """
    Read a field written by write_field_csv.

    λ1 and λ2 are recovered from the obstacle columns, whose discrete Laplacian is exact.

    :rtype: ScalarField
    :raises FieldFormatError: If the rows do not form a square grid centred at the origin.
    """
    with open(path) as f:
        header = f.readline().strip().split(",")
    if tuple(header[:5]) != FIELD_COLUMNS[:5]:
        raise FieldFormatError(path, "expected columns {}".format(",".join(FIELD_COLUMNS)))
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise FieldFormatError(path, str(e))

    n = int(round(math.sqrt(table.shape[0])))
    if n * n != table.shape[0]:
        raise FieldFormatError(path, "{} rows is not a square grid".format(table.shape[0]))
    table = table[np.lexsort((table[:, 1], table[:, 0]))]
    L = float(table[:, 0].max())
    try:
        grid = GridSpec(n, L)
    except ValueError as e:
        raise FieldFormatError(path, str(e))
    if not np.allclose(table[:n, 1], grid.coords(), rtol=0.0, atol=1e-9 * L):
        raise FieldFormatError(path, "nodes are not the uniform grid on [-L, L]²")

    u, psi1, psi2 = (table[:, k].reshape(n, n) for k in (2, 3, 4))
    h = grid.h
    field = ScalarField(
        grid,
        u,
        psi1,
        psi2,
        _obstacle_laplacian(psi1, h),
        _obstacle_laplacian(psi2, h),
        meta={"source": str(path)},
    )
    if table.shape[1] >= 7:
        lower = table[:, 5].reshape(n, n) > 0.5
        upper = table[:, 6].reshape(n, n) > 0.5
        return field.replace(lower=lower, upper=upper)
    return coincidence_masks(field, mask_tol)


def write_trace_csv(path, trace):
    """Columns r, W, dW where dW = W(r_i) - W(r_{i+1}); the last row has no difference."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["r,W,dW"]
    for index, (r, w) in enumerate(zip(trace.radii, trace.values)):
        diff = trace.differences[index] if index < len(trace.differences) else None
        cells = [FLOAT_FORMAT % r, FLOAT_FORMAT % w, "" if diff is None else FLOAT_FORMAT % diff]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_polyline_csv(path, points):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.asarray(points, dtype=float),
        delimiter=",",
        header="x1,x2",
        comments="",
        fmt=FLOAT_FORMAT,
    )
    return path


def write_summary_csv(path, items):
    """One row per corpus item: name, passed, and the detail as compact JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["item", "passed", "detail"])
        for item in items:
            plain = json.loads(dumps(item.detail))
            detail = json.dumps(plain, sort_keys=True, separators=(",", ":"))
            writer.writerow([item.name, "true" if item.passed else "false", detail])
    return path
