"""JSON reading and writing for filtered spaces, HL pairs and splittings.

Matrices act on columns: column j of ``e`` is the image of basis vector j.
``e`` is stored row-major; filtration bases and splitting columns are stored
as lists of column vectors.  Rationals are strings ``"a"`` or ``"a/b"``.
Output is deterministic: keys sorted, rationals reduced.
"""
from __future__ import annotations

import json
from typing import Any

from .exactla import Mat, Subspace, rat, rat_str
from .filt import FilteredSpace, FiltrationError
from .hlpair import HLPair, make_pair, primitives
from .split import Splitting


class MalformedInput(ValueError):
    """Input that does not describe a valid instance; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def mat_rows(m: Mat) -> list:
    return [[rat_str(x) for x in row] for row in m.tolist()]


def mat_columns(m: Mat) -> list:
    return [[rat_str(x) for x in col] for col in m.columns()]


def _rat(x, where: str):
    if isinstance(x, float):
        raise MalformedInput(where, "floats are not accepted; write rationals as strings")
    try:
        return rat(x)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(where, str(exc)) from None


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise MalformedInput(where, "expected an integer")
    return x


def _list(x, where: str) -> list:
    if not isinstance(x, list):
        raise MalformedInput(where, "expected a list")
    return x


def parse_rows(obj, rows: int, cols: int, where: str) -> Mat:
    data = _list(obj, where)
    if len(data) != rows:
        raise MalformedInput(where, f"expected {rows} rows, got {len(data)}")
    out = []
    for a, row in enumerate(data):
        row = _list(row, f"{where}[{a}]")
        if len(row) != cols:
            raise MalformedInput(f"{where}[{a}]", f"expected {cols} entries, got {len(row)}")
        out.append([_rat(x, f"{where}[{a}][{b}]") for b, x in enumerate(row)])
    return Mat(out, cols)


def parse_columns(obj, rows: int, where: str) -> Mat:
    data = _list(obj, where)
    cols = []
    for c, col in enumerate(data):
        col = _list(col, f"{where}[{c}]")
        if len(col) != rows:
            raise MalformedInput(f"{where}[{c}]", f"expected {rows} entries, got {len(col)}")
        cols.append([_rat(x, f"{where}[{c}][{a}]") for a, x in enumerate(col)])
    return Mat.from_columns(cols, rows=rows)


# -- filtered spaces -------------------------------------------------------------


def space_to_json(fs: FilteredSpace) -> dict:
    return {
        "ambient_dim": fs.ambient_dim,
        "filtration": [
            {"index": p, "basis": mat_columns(sub.basis)} for p, sub in fs.steps.items()
        ],
    }


def space_from_json(obj) -> FilteredSpace:
    if not isinstance(obj, dict):
        raise MalformedInput("<root>", "expected a JSON object")
    if "ambient_dim" not in obj:
        raise MalformedInput("ambient_dim", "missing")
    n = _int(obj["ambient_dim"], "ambient_dim")
    if n < 0:
        raise MalformedInput("ambient_dim", "must be non-negative")
    steps = {}
    for t, step in enumerate(_list(obj.get("filtration"), "filtration")):
        where = f"filtration[{t}]"
        if not isinstance(step, dict):
            raise MalformedInput(where, "expected an object")
        if "index" not in step:
            raise MalformedInput(f"{where}.index", "missing")
        p = _int(step["index"], f"{where}.index")
        if p in steps:
            raise MalformedInput(f"{where}.index", f"duplicate index {p}")
        basis = parse_columns(step.get("basis", []), n, f"{where}.basis")
        steps[p] = Subspace.span(basis, n)
    fs = FilteredSpace(n, steps)
    try:
        fs.type_range
    except FiltrationError as exc:
        raise MalformedInput("filtration", str(exc)) from None
    return fs


# -- HL pairs --------------------------------------------------------------------


def pair_to_json(pair: HLPair) -> dict:
    out = space_to_json(pair.space)
    out["e"] = mat_rows(pair.e)
    out["twist"] = pair.twist
    if pair.metadata or pair.name:
        meta = dict(pair.metadata)
        if pair.name:
            meta.setdefault("name", pair.name)
        out["metadata"] = meta
    return out


def pair_from_json(obj) -> HLPair:
    fs = space_from_json(obj)
    n = fs.ambient_dim
    if "e" not in obj:
        raise MalformedInput("e", "missing")
    e = parse_rows(obj["e"], n, n, "e")
    twist = _int(obj.get("twist", 1), "twist")
    meta = obj.get("metadata", {})
    if not isinstance(meta, dict):
        raise MalformedInput("metadata", "expected an object")
    try:
        return make_pair(fs, e, twist=twist, name=str(meta.get("name", "")), metadata=meta)
    except FiltrationError as exc:
        raise MalformedInput("e", str(exc)) from None


def load_pair(text: str) -> HLPair:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput("<root>", f"invalid JSON: {exc}") from None
    return pair_from_json(obj)


# -- splittings ------------------------------------------------------------------


def splitting_to_json(s: Splitting, trace: bool = True) -> dict:
    """Columns in graded-model order, plus the same map with columns in PLD order."""
    pld = primitives(s.pair)
    out = {
        "method": s.method,
        "columns": mat_columns(s.matrix),
        "labels": [{"p": p, "k": k} for p, k in s.pair.model.labels],
        "pld_columns": mat_columns(s.pld_matrix),
        "pld_labels": [
            {"p": l.p, "i": l.i, "j": l.j, "k": l.k} for l in pld.labels
        ],
    }
    if trace and s.trace:
        out["seedable_trace"] = [
            {
                "degree": st.degree,
                "correction": mat_rows(st.correction),
                "residual": mat_rows(st.residual),
            }
            for st in s.trace
        ]
    return out


def splitting_from_json(obj, pair: HLPair) -> Splitting:
    if not isinstance(obj, dict):
        raise MalformedInput("<splitting>", "expected an object")
    m = parse_columns(obj.get("columns"), pair.dim, "columns")
    if m.cols != pair.dim:
        raise MalformedInput("columns", f"expected {pair.dim} columns")
    return Splitting(pair, m, str(obj.get("method", "")))
