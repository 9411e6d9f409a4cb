import numpy as np
import pytest

from lpipm import LpProblem, ParseError, parse_mps, write_mps

MINIMAL = """NAME          TOY
ROWS
 N  COST
 E  R1
COLUMNS
    X1  COST  1.0  R1  1.0
    X2  R1  1.0
RHS
    RHS  R1  2.0
ENDATA
"""


class TestParse:
    def test_minimal_equality(self):
        p = parse_mps(MINIMAL)
        assert p.name == "TOY"
        assert p.nrows == 1 and p.ncols == 2
        assert p.row_types["R1"] == "E"
        assert p.objective == {"X1": 1.0}
        assert p.entries["X1"] == [("R1", 1.0)]
        assert p.rhs["R1"] == 2.0

    def test_missing_endata(self):
        with pytest.raises(ParseError):
            parse_mps(MINIMAL.replace("ENDATA\n", ""))

    def test_up_bound(self):
        text = MINIMAL.replace("ENDATA", "BOUNDS\n UP BND  X1  5.0\nENDATA")
        p = parse_mps(text)
        assert p.bounds_of("X1") == (0.0, 5.0)
        assert p.bounds_of("X2") == (0.0, np.inf)

    def test_bound_keys(self):
        text = MINIMAL.replace(
            "ENDATA",
            "BOUNDS\n LO BND  X1  1.0\n UP BND  X1  4.0\n FR BND  X2\nENDATA",
        )
        p = parse_mps(text)
        assert p.bounds_of("X1") == (1.0, 4.0)
        lo, up = p.bounds_of("X2")
        assert np.isneginf(lo) and np.isposinf(up)

    def test_fx_and_mi(self):
        text = MINIMAL.replace(
            "ENDATA", "BOUNDS\n FX BND  X1  2.5\n MI BND  X2\nENDATA"
        )
        p = parse_mps(text)
        assert p.bounds_of("X1") == (2.5, 2.5)
        assert np.isneginf(p.bounds_of("X2")[0])

    def test_negative_up_frees_lower(self):
        text = MINIMAL.replace("ENDATA", "BOUNDS\n UP BND  X1  -1.0\nENDATA")
        p = parse_mps(text)
        lo, up = p.bounds_of("X1")
        assert np.isneginf(lo) and up == -1.0

    def test_unknown_bound_key_rejected(self):
        text = MINIMAL.replace("ENDATA", "BOUNDS\n XX BND  X1  5.0\nENDATA")
        with pytest.raises(ParseError):
            parse_mps(text)

    def test_undeclared_row_reference(self):
        bad = MINIMAL.replace("R1  1.0\n    X2", "R9  1.0\n    X2")
        with pytest.raises(ParseError) as err:
            parse_mps(bad)
        assert err.value.line is not None

    def test_non_numeric_field(self):
        bad = MINIMAL.replace("RHS  R1  2.0", "RHS  R1  abc")
        with pytest.raises(ParseError):
            parse_mps(bad)

    def test_duplicates_summed(self):
        text = MINIMAL.replace(
            "    X1  COST  1.0  R1  1.0", "    X1  COST  1.0  R1  1.0\n    X1  R1  0.5"
        )
        p = parse_mps(text)
        entries = dict(p.entries["X1"])
        # duplicate (row, col) pairs are separate list entries; the
        # conversion sums them, so check the raw list here
        vals = [v for r, v in p.entries["X1"] if r == "R1"]
        assert sum(vals) == 1.5
        del entries

    def test_comments_and_blank_lines(self):
        text = "* header comment\n" + MINIMAL.replace(
            "COLUMNS", "COLUMNS\n* a comment inside\n"
        )
        p = parse_mps(text)
        assert p.ncols == 2

    def test_objsense_max(self):
        text = MINIMAL.replace("ROWS", "OBJSENSE\n    MAX\nROWS")
        assert parse_mps(text).sense == "max"

    def test_ranges(self):
        text = MINIMAL.replace(" E  R1", " L  R1").replace(
            "ENDATA", "RANGES\n    RNG  R1  1.5\nENDATA"
        )
        p = parse_mps(text)
        assert p.ranges["R1"] == 1.5

    def test_marker_lines_ignored(self):
        text = MINIMAL.replace(
            "COLUMNS",
            "COLUMNS\n    MARKER  'MARKER'  'INTORG'",
        ).replace("    X2", "    MARKER  'MARKER'  'INTEND'\n    X2")
        p = parse_mps(text)
        assert p.ncols == 2

    def test_fixed_format_with_tabs_and_bytes(self):
        p = parse_mps(MINIMAL.replace("    ", "\t").encode())
        assert p.ncols == 2

    def test_free_row_entries_dropped(self):
        text = MINIMAL.replace(" N  COST", " N  COST\n N  FREE").replace(
            "    X2  R1  1.0", "    X2  R1  1.0  FREE  9.0"
        )
        p = parse_mps(text)
        assert p.nrows == 1  # FREE is not a constraint row


class TestWrite:
    def test_round_trip_values_exact(self):
        p = parse_mps(MINIMAL)
        p.objective["X1"] = 0.1 + 0.2  # value without a short decimal form
        text = write_mps(p)
        p2 = parse_mps(text)
        assert p2.objective["X1"] == p.objective["X1"]
        assert p2.rhs["R1"] == p.rhs["R1"]

    def test_bounds_round_trip(self):
        p = LpProblem(name="B")
        p.objective_name = "COST"
        p.row_names = ["R1"]
        p.row_types = {"R1": "E"}
        p.col_names = ["A", "B", "C"]
        p.entries = {"A": [("R1", 1.0)], "B": [("R1", 1.0)], "C": [("R1", 1.0)]}
        p.rhs = {"R1": 1.0}
        p.lower = {"B": -np.inf}
        p.upper = {"A": 2.0, "B": np.inf}
        p.lower["C"] = 0.5
        p.upper["C"] = 0.5
        p2 = parse_mps(write_mps(p))
        assert p2.bounds_of("A") == (0.0, 2.0)
        assert np.isneginf(p2.bounds_of("B")[0])
        assert p2.bounds_of("C") == (0.5, 0.5)
