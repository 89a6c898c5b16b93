import io
import json

import pytest
from hypothesis import given, strategies as st

from dewsim.errors import ConfigError
from dewsim.report import (InstrumentationRow, ResultRow, comparison_reduction, emit_instrumentation,
                           emit_results, read_instrumentation, read_results)

HEADER = "block_bytes,assoc,sets,accesses,misses,hits,miss_rate"


def render(rows, fmt="csv"):
    buf = io.StringIO()
    emit_results(rows, fmt, buf)
    return buf.getvalue()


def test_single_row_csv():
    assert render([ResultRow.from_counts(4, 2, 8, 100, 25)]) == HEADER + "\n4,2,8,100,25,75,0.250000\n"


def test_empty_is_header_only():
    assert render([]) == HEADER + "\n"


def test_rows_are_sorted():
    rows = [ResultRow.from_counts(16, 1, 1, 10, 1), ResultRow.from_counts(4, 2, 2, 10, 1),
            ResultRow.from_counts(4, 2, 1, 10, 1), ResultRow.from_counts(4, 1, 4, 10, 1)]
    keys = [tuple(map(int, line.split(",")[:3])) for line in render(rows).splitlines()[1:]]
    assert keys == [(4, 1, 4), (4, 2, 1), (4, 2, 2), (16, 1, 1)]


def test_zero_accesses_rate():
    assert ResultRow.from_counts(4, 1, 1, 0, 0).miss_rate == 0.0


def test_json_output():
    rec = json.loads(render([ResultRow.from_counts(4, 2, 8, 3, 1)], "json"))
    assert rec == [{"block_bytes": 4, "assoc": 2, "sets": 8, "accesses": 3, "misses": 1, "hits": 2,
                    "miss_rate": 0.333333}]


def test_unknown_format():
    with pytest.raises(ConfigError):
        render([], "xml")


def test_file_destination(tmp_path):
    path = tmp_path / "out.csv"
    emit_results([ResultRow.from_counts(1, 1, 1, 4, 4)], "csv", path)
    assert path.read_text().splitlines()[1] == "1,1,1,4,4,0,1.000000"


counts = st.tuples(st.sampled_from([1, 4, 64]), st.sampled_from([1, 2, 16]), st.sampled_from([1, 8, 2**14]),
                   st.integers(0, 10**6)).flatmap(
    lambda t: st.integers(0, t[3]).map(lambda m: ResultRow.from_counts(*t, m)))


@given(st.lists(counts, max_size=20, unique_by=lambda r: (r.block_bytes, r.assoc, r.sets)))
def test_csv_round_trip(rows):
    back = read_results(io.StringIO(render(rows)))
    expected = sorted(rows, key=lambda r: (r.block_bytes, r.assoc, r.sets))
    assert [(r.block_bytes, r.assoc, r.sets, r.accesses, r.misses, r.hits) for r in back] == \
           [(r.block_bytes, r.assoc, r.sets, r.accesses, r.misses, r.hits) for r in expected]
    assert all(abs(a.miss_rate - b.miss_rate) <= 5e-7 for a, b in zip(back, expected))


def test_instrumentation_round_trip():
    rows = [InstrumentationRow(4, 2, 15, 15, 0, 15, 0, 0, 14), InstrumentationRow(1, 4, 30, 16, 1, 15, 0, 0, 20)]
    buf = io.StringIO()
    emit_instrumentation(rows, "csv", buf)
    text = buf.getvalue()
    assert text.startswith("block_bytes,assoc,unoptimized_evals,node_evals,mra_count,searches,"
                           "wave_count,mre_count,tag_comparisons\n")
    assert read_instrumentation(io.StringIO(text)) == sorted(rows, key=lambda r: (r.block_bytes, r.assoc))


def test_comparison_reduction():
    assert comparison_reduction(25, 100) == 0.75
    assert comparison_reduction(0, 0) == 0.0
