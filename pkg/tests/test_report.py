import math

from hypothesis import given, settings, strategies as st

from fastmm import report

cells = st.one_of(st.integers(-10**12, 10**12), st.booleans(), st.none(),
                  st.floats(allow_nan=True, allow_infinity=True),
                  st.text(alphabet="abcxyz ,;\"'", min_size=1, max_size=8).filter(
                      lambda s: s.strip() == s and s not in ("true", "false") and not _numeric(s)))


def _numeric(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fixed_dictionaries({"a": cells, "b": cells, "c": cells}), min_size=1, max_size=5))
def test_csv_round_trip(rows):
    assert report.rows_equal(report.parse(report.emit(rows, "csv"), "csv"), rows)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fixed_dictionaries({"a": st.integers(), "b": st.floats(allow_nan=False, allow_infinity=False),
                                       "c": st.text(max_size=5)}), max_size=4))
def test_json_round_trip(rows):
    assert report.parse(report.emit(rows, "json"), "json") == rows


def test_nan_equality_and_empty():
    assert report.rows_equal([{"x": math.nan}], [{"x": math.nan}])
    assert report.parse("", "csv") == [] and report.emit([], "csv") == ""
