"""Model file export and import: MPS, LP, warm starts, solutions.

Exports are byte-stable: rows are ordered by tag then indices and columns by
variable kind then indices, with one fixed number format throughout.  The
parsers read back the subset of MPS/LP these writers emit (plus the common
bound types), which is what the round-trip checks and the external-solver
handoff rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lookopt.model import Assignment, ModelInstance, Row, Variable

OBJ_NAME = "OBJ"


def _num(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# MPS
# ---------------------------------------------------------------------------

def write_mps(model: ModelInstance, path: str | Path, name: str = "LOOKOPT") -> None:
    """Column-aligned MPS with integer markers; minimization objective."""
    variables = model.sorted_variables()
    rows = model.sorted_rows()

    # column entries grouped per variable, rows in export order
    row_pos = {row.name: i for i, row in enumerate(rows)}
    entries: dict[str, list[tuple[int, str, float]]] = {v.name: [] for v in variables}
    for row in rows:
        for var_name, coef in row.coeffs.items():
            entries[var_name].append((row_pos[row.name], row.name, coef))
    for var_name, coef in model.objective.items():
        entries[var_name].append((-1, OBJ_NAME, coef))

    lines = [f"NAME          {name}", "ROWS", f" N  {OBJ_NAME}"]
    for row in rows:
        lines.append(f" {row.sense}  {row.name}")

    lines.append("COLUMNS")
    marker_open = False

    def emit_pairs(var_name: str, pairs: list[tuple[str, float]]):
        for i in range(0, len(pairs), 2):
            chunk = pairs[i:i + 2]
            parts = [f"    {var_name:<10}"]
            for row_name, coef in chunk:
                parts.append(f"{row_name:<10}  {_num(coef):>12}")
            lines.append("  ".join(parts))

    for var in variables:
        var_entries = sorted(entries[var.name], key=lambda e: e[0])
        pairs = [(row_name, coef) for _, row_name, coef in var_entries]
        if var.binary and not marker_open:
            lines.append("    MARKER                 'MARKER'                 'INTORG'")
            marker_open = True
        if not var.binary and marker_open:
            lines.append("    MARKER                 'MARKER'                 'INTEND'")
            marker_open = False
        if pairs:
            emit_pairs(var.name, pairs)
        else:
            emit_pairs(var.name, [(OBJ_NAME, 0.0)])
    if marker_open:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")

    lines.append("RHS")
    rhs_pairs = [(row.name, row.rhs) for row in rows if row.rhs != 0.0]
    for i in range(0, len(rhs_pairs), 2):
        chunk = rhs_pairs[i:i + 2]
        parts = ["    RHS       "]
        for row_name, rhs in chunk:
            parts.append(f"{row_name:<10}  {_num(rhs):>12}")
        lines.append("  ".join(parts))

    lines.append("BOUNDS")
    for var in variables:
        if var.binary:
            lines.append(f" BV BND       {var.name}")
        else:
            if var.lb == var.ub:
                lines.append(f" FX BND       {var.name:<10}  {_num(var.lb):>12}")
                continue
            if var.lb != 0.0:
                lines.append(f" LO BND       {var.name:<10}  {_num(var.lb):>12}")
            if not math.isinf(var.ub):
                lines.append(f" UP BND       {var.name:<10}  {_num(var.ub):>12}")
    lines.append("ENDATA")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# LP (CPLEX-style)
# ---------------------------------------------------------------------------

def _lp_terms(coeffs: dict[str, float], order: list[str]) -> str:
    parts = []
    for name in order:
        coef = coeffs[name]
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {name}")
    text = " ".join(parts)
    if text.startswith("+ "):
        text = text[2:]
    return text


def _wrap(prefix: str, body: str, width: int = 78) -> list[str]:
    words = body.split(" ")
    lines = []
    current = prefix
    for word in words:
        if len(current) + 1 + len(word) > width and current != prefix:
            lines.append(current)
            current = " " + word
        else:
            current = current + " " + word
    lines.append(current)
    return lines


def write_lp(model: ModelInstance, path: str | Path) -> None:
    variables = model.sorted_variables()
    rows = model.sorted_rows()
    var_order = [v.name for v in variables]
    var_rank = {name: i for i, name in enumerate(var_order)}

    lines = ["\\ look allocation model", "Minimize"]
    obj_order = sorted(model.objective, key=var_rank.__getitem__)
    lines.extend(_wrap(f" {OBJ_NAME}:", _lp_terms(model.objective, obj_order)))

    lines.append("Subject To")
    sense_txt = {"E": "=", "L": "<=", "G": ">="}
    for row in rows:
        order = sorted(row.coeffs, key=var_rank.__getitem__)
        body = f"{_lp_terms(row.coeffs, order)} {sense_txt[row.sense]} {_num(row.rhs)}"
        lines.extend(_wrap(f" {row.name}:", body))

    lines.append("Bounds")
    for var in variables:
        if var.binary:
            continue
        if var.lb == var.ub:
            lines.append(f" {var.name} = {_num(var.lb)}")
        elif math.isinf(var.ub):
            if var.lb != 0.0:
                lines.append(f" {var.name} >= {_num(var.lb)}")
        else:
            lines.append(f" {_num(var.lb)} <= {var.name} <= {_num(var.ub)}")

    binaries = [v.name for v in variables if v.binary]
    if binaries:
        lines.append("Binaries")
        for i in range(0, len(binaries), 6):
            lines.append(" " + " ".join(binaries[i:i + 6]))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")


def export_model(model: ModelInstance, path: str | Path, fmt: str) -> None:
    if fmt == "mps":
        write_mps(model, path)
    elif fmt == "lp":
        write_lp(model, path)
    else:
        raise ValueError(f"unknown model format {fmt!r} (expected 'mps' or 'lp')")


# ---------------------------------------------------------------------------
# Parsed form (shared by the MPS and LP readers)
# ---------------------------------------------------------------------------

@dataclass
class ParsedModel:
    name: str
    variables: dict[str, Variable]
    rows: list[Row]
    objective: dict[str, float]

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)


def _tag_of(row_name: str) -> str:
    return row_name.split("_", 1)[0]


def parse_mps(path: str | Path) -> ParsedModel:
    name = ""
    senses: dict[str, str] = {}
    row_order: list[str] = []
    coeffs: dict[str, dict[str, float]] = {}
    objective: dict[str, float] = {}
    var_order: list[str] = []
    binaries: set[str] = set()
    lb: dict[str, float] = {}
    ub: dict[str, float] = {}
    rhs: dict[str, float] = {}
    section = None
    integer_mode = False

    for raw in Path(path).read_text().splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw.startswith(" ") and not raw.startswith("\t"):
            fields = raw.split()
            section = fields[0]
            if section == "NAME" and len(fields) > 1:
                name = fields[1]
            continue
        fields = raw.split()
        if section == "ROWS":
            sense, row_name = fields
            if sense == "N":
                continue
            senses[row_name] = sense
            row_order.append(row_name)
            coeffs[row_name] = {}
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                integer_mode = fields[2] == "'INTORG'"
                continue
            var_name = fields[0]
            if var_name not in lb:
                var_order.append(var_name)
                lb[var_name] = 0.0
                ub[var_name] = math.inf
                if integer_mode:
                    binaries.add(var_name)
            for i in range(1, len(fields), 2):
                row_name, value = fields[i], float(fields[i + 1])
                if row_name == OBJ_NAME:
                    if value != 0.0:
                        objective[var_name] = value
                else:
                    coeffs[row_name][var_name] = value
        elif section == "RHS":
            for i in range(1, len(fields), 2):
                rhs[fields[i]] = float(fields[i + 1])
        elif section == "BOUNDS":
            bound_type, _, var_name = fields[0], fields[1], fields[2]
            value = float(fields[3]) if len(fields) > 3 else 0.0
            if bound_type == "BV":
                binaries.add(var_name)
                lb[var_name], ub[var_name] = 0.0, 1.0
            elif bound_type == "UP":
                ub[var_name] = value
            elif bound_type == "LO":
                lb[var_name] = value
            elif bound_type == "FX":
                lb[var_name] = ub[var_name] = value
            elif bound_type == "MI":
                lb[var_name] = -math.inf
            elif bound_type == "PL":
                ub[var_name] = math.inf
            else:
                raise ValueError(f"unsupported bound type {bound_type!r}")

    variables = {
        v: Variable(v, binary=v in binaries, lb=lb[v],
                    ub=1.0 if v in binaries else ub[v])
        for v in var_order
    }
    rows = [Row(rn, _tag_of(rn), coeffs[rn], senses[rn], rhs.get(rn, 0.0))
            for rn in row_order]
    return ParsedModel(name=name, variables=variables, rows=rows, objective=objective)


def parse_lp(path: str | Path) -> ParsedModel:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]

    section = None
    pending: list[str] = []
    statements: dict[str, list[str]] = {"objective": [], "rows": [], "bounds": [], "binaries": []}

    def flush():
        if pending:
            target = "objective" if section == "Minimize" else "rows"
            statements[target].append(" ".join(pending))
            pending.clear()

    for ln in lines:
        stripped = ln.strip()
        lowered = stripped.lower()
        if lowered in ("minimize", "maximize", "subject to", "bounds", "binaries", "generals", "end"):
            flush()
            section = {"minimize": "Minimize", "maximize": "Maximize",
                       "subject to": "Subject To", "bounds": "Bounds",
                       "binaries": "Binaries", "generals": "Binaries",
                       "end": "End"}[lowered]
            continue
        if section in ("Minimize", "Subject To"):
            # a new statement starts when a label like "name:" appears
            if ":" in stripped.split()[0]:
                flush()
            pending.append(stripped)
        elif section == "Bounds":
            statements["bounds"].append(stripped)
        elif section == "Binaries":
            statements["binaries"].append(stripped)
    flush()

    def parse_expr(tokens: list[str]) -> dict[str, float]:
        coeffs: dict[str, float] = {}
        sign = 1.0
        coef: float | None = None
        for tok in tokens:
            if tok == "+":
                sign, coef = 1.0, None
            elif tok == "-":
                sign, coef = -1.0, None
            else:
                try:
                    coef = float(tok)
                except ValueError:
                    coeffs[tok] = coeffs.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
                    sign, coef = 1.0, None
        return coeffs

    objective: dict[str, float] = {}
    for stmt in statements["objective"]:
        body = stmt.split(":", 1)[1]
        objective = parse_expr(body.split())

    rows: list[Row] = []
    for stmt in statements["rows"]:
        label, body = stmt.split(":", 1)
        row_name = label.strip()
        for op, sense in (("<=", "L"), (">=", "G"), ("=", "E")):
            if op in body:
                lhs, rhs_txt = body.rsplit(op, 1)
                rows.append(Row(row_name, _tag_of(row_name),
                                parse_expr(lhs.split()), sense, float(rhs_txt)))
                break

    binaries: set[str] = set()
    for stmt in statements["binaries"]:
        binaries.update(stmt.split())

    bounds: dict[str, tuple[float, float]] = {}
    for stmt in statements["bounds"]:
        tokens = stmt.split()
        if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
            bounds[tokens[2]] = (float(tokens[0]), float(tokens[4]))
        elif len(tokens) == 3 and tokens[1] == "=":
            bounds[tokens[0]] = (float(tokens[2]), float(tokens[2]))
        elif len(tokens) == 3 and tokens[1] == ">=":
            bounds[tokens[0]] = (float(tokens[2]), math.inf)
        elif len(tokens) == 3 and tokens[1] == "<=":
            bounds[tokens[0]] = (0.0, float(tokens[2]))
        else:
            raise ValueError(f"unsupported bound line: {stmt}")

    var_names: list[str] = []
    seen: set[str] = set()
    for source in ([objective] + [row.coeffs for row in rows]):
        for v in source:
            if v not in seen:
                seen.add(v)
                var_names.append(v)
    for v in list(bounds) + sorted(binaries):
        if v not in seen:
            seen.add(v)
            var_names.append(v)

    variables = {}
    for v in var_names:
        if v in binaries:
            variables[v] = Variable(v, binary=True, lb=0.0, ub=1.0)
        else:
            lo, hi = bounds.get(v, (0.0, math.inf))
            variables[v] = Variable(v, binary=False, lb=lo, ub=hi)
    return ParsedModel(name="", variables=variables, rows=rows, objective=objective)


def parse_model_file(path: str | Path) -> ParsedModel:
    path = Path(path)
    if path.suffix.lower() == ".mps":
        return parse_mps(path)
    if path.suffix.lower() == ".lp":
        return parse_lp(path)
    # sniff: MPS starts with NAME/ROWS
    head = path.read_text().lstrip()[:8].upper()
    return parse_mps(path) if head.startswith(("NAME", "ROWS")) else parse_lp(path)


# ---------------------------------------------------------------------------
# Warm start and solution files: one "name value" pair per line
# ---------------------------------------------------------------------------

def write_warm_start(model: ModelInstance, assignment: Assignment, path: str | Path) -> None:
    """Persist an assignment covering every model variable."""
    lines = []
    for var in model.sorted_variables():
        if var.name not in assignment.values:
            raise ValueError(f"assignment is missing variable {var.name}")
        lines.append(f"{var.name} {_num(assignment.values[var.name])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_solution(values: dict[str, float], path: str | Path) -> None:
    lines = [f"{name} {_num(value)}" for name, value in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_solution(path: str | Path) -> Assignment:
    """Read `name value` lines; variables not listed default to zero."""
    values: dict[str, float] = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{i}: expected 'name value', got {raw!r}")
        values[parts[0]] = float(parts[1])
    return Assignment(values)


# ---------------------------------------------------------------------------
# Matrix form for handing either a built or a parsed model to a matrix solver
# ---------------------------------------------------------------------------

@dataclass
class LinearSystem:
    """COO-style matrix form: minimize c'x subject to row senses and bounds."""

    names: list[str]
    c: np.ndarray
    integrality: np.ndarray  # 1 where integer-constrained
    lb: np.ndarray
    ub: np.ndarray
    row_names: list[str]
    row_sense: list[str]
    rhs: np.ndarray
    entries: list[tuple[int, int, float]]  # (row, col, coefficient)


def as_linear_system(model: ModelInstance | ParsedModel) -> LinearSystem:
    if isinstance(model, ModelInstance):
        variables = model.sorted_variables()
        rows = model.sorted_rows()
    else:
        variables = list(model.variables.values())
        rows = model.rows
    index = {v.name: i for i, v in enumerate(variables)}
    entries = []
    for ri, row in enumerate(rows):
        for name, coef in row.coeffs.items():
            entries.append((ri, index[name], coef))
    c = np.zeros(len(variables))
    for name, coef in model.objective.items():
        c[index[name]] = coef
    return LinearSystem(
        names=[v.name for v in variables],
        c=c,
        integrality=np.array([1 if v.binary else 0 for v in variables]),
        lb=np.array([v.lb for v in variables]),
        ub=np.array([v.ub for v in variables]),
        row_names=[r.name for r in rows],
        row_sense=[r.sense for r in rows],
        rhs=np.array([r.rhs for r in rows]),
        entries=entries,
    )
