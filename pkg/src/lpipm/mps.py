"""MPS reading and writing.

Both fixed-format and whitespace-delimited free-format files are
accepted: section headers start in column 1, data lines are indented,
comment lines start with ``*``.  Duplicate COLUMNS/RHS entries are
summed.  Integer markers are skipped, so MIP files parse as their LP
relaxations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_ROW_TYPES = {"N", "L", "G", "E"}
# bound keys with a numeric value, and those without
_VALUE_BOUNDS = {"UP", "LO", "FX", "UI", "LI"}
_FLAG_BOUNDS = {"FR", "MI", "PL", "BV"}


@dataclass
class LpProblem:
    """Row/column form of an LP as read from MPS.

    ``entries`` maps column name to a list of ``(row_name, coefficient)``
    pairs; the objective row is kept separately in ``objective``.
    """

    name: str = ""
    sense: str = "min"
    row_names: list = field(default_factory=list)
    row_types: dict = field(default_factory=dict)
    objective_name: str = ""
    col_names: list = field(default_factory=list)
    entries: dict = field(default_factory=dict)
    objective: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)
    objective_constant: float = 0.0

    @property
    def nrows(self) -> int:
        return len(self.row_names)

    @property
    def ncols(self) -> int:
        return len(self.col_names)

    def bounds_of(self, col) -> tuple:
        return self.lower.get(col, 0.0), self.upper.get(col, np.inf)


def _to_float(token, lineno):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", lineno) from None


def parse_mps(source) -> LpProblem:
    """Parse MPS text given as str, bytes, or a line iterable."""
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [
            ln.decode("utf-8", errors="replace") if isinstance(ln, bytes) else ln
            for ln in source
        ]

    prob = LpProblem()
    section = None
    seen_endata = False
    seen_objective = False
    known_rows = set()
    known_cols = set()
    explicit_lower = set()

    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        indented = raw[0] in (" ", "\t")
        tokens = raw.split()

        if not indented:
            head = tokens[0].upper()
            if head not in _SECTIONS:
                raise ParseError(f"unknown section header {tokens[0]!r}", lineno)
            if head == "NAME":
                prob.name = tokens[1] if len(tokens) > 1 else ""
                section = None
            elif head == "ENDATA":
                seen_endata = True
                break
            else:
                section = head
            continue

        if section is None:
            raise ParseError("data line outside any section", lineno)

        if section == "OBJSENSE":
            word = tokens[0].upper()
            if word in ("MIN", "MINIMIZE"):
                prob.sense = "min"
            elif word in ("MAX", "MAXIMIZE"):
                prob.sense = "max"
            else:
                raise ParseError(f"unknown objective sense {tokens[0]!r}", lineno)

        elif section == "ROWS":
            if len(tokens) != 2:
                raise ParseError("ROWS line must be '<type> <name>'", lineno)
            rtype = tokens[0].upper()
            rname = tokens[1]
            if rtype not in _ROW_TYPES:
                raise ParseError(f"unknown row type {tokens[0]!r}", lineno)
            if rname in known_rows or rname == prob.objective_name:
                raise ParseError(f"duplicate row name {rname!r}", lineno)
            if rtype == "N":
                # first N row is the objective; later ones are free rows
                if not seen_objective:
                    prob.objective_name = rname
                    seen_objective = True
                known_rows.add(rname)
            else:
                prob.row_names.append(rname)
                prob.row_types[rname] = rtype
                known_rows.add(rname)

        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].upper() == "'MARKER'":
                continue
            col = tokens[0]
            pairs = tokens[1:]
            if not pairs or len(pairs) % 2:
                raise ParseError("COLUMNS line needs (row, value) pairs", lineno)
            if col not in known_cols:
                known_cols.add(col)
                prob.col_names.append(col)
                prob.entries[col] = []
            for rname, vtok in zip(pairs[::2], pairs[1::2]):
                val = _to_float(vtok, lineno)
                if rname == prob.objective_name:
                    prob.objective[col] = prob.objective.get(col, 0.0) + val
                elif rname in prob.row_types:
                    prob.entries[col].append((rname, val))
                elif rname in known_rows:
                    continue  # entry on a non-objective free row
                else:
                    raise ParseError(f"reference to undeclared row {rname!r}", lineno)

        elif section in ("RHS", "RANGES"):
            pairs = tokens if len(tokens) % 2 == 0 else tokens[1:]
            if not pairs or len(pairs) % 2:
                raise ParseError(f"{section} line needs (row, value) pairs", lineno)
            store = prob.rhs if section == "RHS" else prob.ranges
            for rname, vtok in zip(pairs[::2], pairs[1::2]):
                val = _to_float(vtok, lineno)
                if rname == prob.objective_name:
                    if section == "RHS":
                        # RHS on the objective row is a negated constant
                        prob.objective_constant -= val
                    continue
                if rname not in prob.row_types:
                    if rname in known_rows:
                        continue
                    raise ParseError(f"reference to undeclared row {rname!r}", lineno)
                store[rname] = store.get(rname, 0.0) + val

        elif section == "BOUNDS":
            key = tokens[0].upper()
            if key in _VALUE_BOUNDS:
                if len(tokens) != 4:
                    raise ParseError(f"{key} bound needs '<key> <set> <col> <value>'", lineno)
                col, val = tokens[2], _to_float(tokens[3], lineno)
            elif key in _FLAG_BOUNDS:
                if len(tokens) not in (3, 4):
                    raise ParseError(f"{key} bound needs '<key> <set> <col>'", lineno)
                col, val = tokens[2], None
            else:
                raise ParseError(f"unknown bound key {tokens[0]!r}", lineno)
            if col not in known_cols:
                raise ParseError(f"bound on undeclared column {col!r}", lineno)
            if key in ("UP", "UI"):
                prob.upper[col] = val
                if val < 0 and col not in explicit_lower:
                    # conventional MPS reading of a negative upper bound
                    prob.lower[col] = -np.inf
            elif key in ("LO", "LI"):
                prob.lower[col] = val
                explicit_lower.add(col)
            elif key == "FX":
                prob.lower[col] = val
                prob.upper[col] = val
                explicit_lower.add(col)
            elif key == "FR":
                prob.lower[col] = -np.inf
                prob.upper[col] = np.inf
                explicit_lower.add(col)
            elif key == "MI":
                prob.lower[col] = -np.inf
                explicit_lower.add(col)
            elif key == "PL":
                prob.upper[col] = np.inf
            elif key == "BV":
                prob.lower[col] = 0.0
                prob.upper[col] = 1.0
                explicit_lower.add(col)

    if not seen_endata:
        raise ParseError("missing ENDATA", len(lines))
    if not seen_objective:
        raise ParseError("no objective (N) row declared", len(lines))
    for col, lo in prob.lower.items():
        up = prob.upper.get(col, np.inf)
        if lo > up:
            raise ParseError(f"column {col!r} has lower bound above upper bound")
    return prob


def write_mps(prob: LpProblem) -> str:
    """Serialize back to free-format MPS with round-trip exact floats."""
    out = [f"NAME          {prob.name}".rstrip()]
    if prob.sense == "max":
        out.append("OBJSENSE")
        out.append("    MAX")
    out.append("ROWS")
    out.append(f" N  {prob.objective_name or 'COST'}")
    for rname in prob.row_names:
        out.append(f" {prob.row_types[rname]}  {rname}")
    out.append("COLUMNS")
    obj_name = prob.objective_name or "COST"
    for col in prob.col_names:
        if col in prob.objective and prob.objective[col] != 0.0:
            out.append(f"    {col}  {obj_name}  {prob.objective[col]:.17g}")
        for rname, val in prob.entries[col]:
            out.append(f"    {col}  {rname}  {val:.17g}")
    out.append("RHS")
    for rname in prob.row_names:
        val = prob.rhs.get(rname, 0.0)
        if val != 0.0:
            out.append(f"    RHS  {rname}  {val:.17g}")
    if prob.objective_constant != 0.0:
        out.append(f"    RHS  {obj_name}  {-prob.objective_constant:.17g}")
    if prob.ranges:
        out.append("RANGES")
        for rname in prob.row_names:
            if rname in prob.ranges:
                out.append(f"    RNG  {rname}  {prob.ranges[rname]:.17g}")
    bound_lines = []
    for col in prob.col_names:
        lo, up = prob.bounds_of(col)
        if lo == up:
            bound_lines.append(f" FX BND  {col}  {lo:.17g}")
            continue
        if np.isneginf(lo) and np.isposinf(up):
            bound_lines.append(f" FR BND  {col}")
            continue
        if np.isneginf(lo):
            bound_lines.append(f" MI BND  {col}")
        elif lo != 0.0:
            bound_lines.append(f" LO BND  {col}  {lo:.17g}")
        if not np.isposinf(up):
            bound_lines.append(f" UP BND  {col}  {up:.17g}")
    if bound_lines:
        out.append("BOUNDS")
        out.extend(bound_lines)
    out.append("ENDATA")
    return "\n".join(out) + "\n"
