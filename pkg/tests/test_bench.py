import numpy as np

from fastmm.bench import (STABILITY_RATIO_BOUND, _exact_reference, apa_lambda_ladder, count_check, crossover_table,
                          first_win, growth_ratios, max_relative_error, stability_report, time_min)
from fastmm.ring import mpq, seeded_random_matrix
from fastmm.zoo import strassen2x2, winograd2x2


def test_exact_reference_float_inputs():
    A = np.array([[0.1, 0.2]])
    B = np.array([[0.3], [0.7]])
    ref = _exact_reference(A, B)
    assert ref[0, 0] == mpq(0.1) * mpq(0.3) + mpq(0.2) * mpq(0.7)
    assert max_relative_error(A @ B, ref) < 1e-15


def test_straightforward_stability_is_exact():
    reps = stability_report(None, [8, 16], seed=1)
    assert all(r.max_rel_error == 0 and r.levels == 0 for r in reps)


def test_strassen_float_inputs():
    reps = stability_report(strassen2x2(), [8, 16, 32], cutoff=2, distribution="float")
    assert [r.levels for r in reps] == [2, 3, 4]
    assert all(0 < r.max_rel_error < 1e-12 for r in reps)
    assert all(x < STABILITY_RATIO_BOUND for x in growth_ratios(reps))


def test_apa_ladder_knee():
    rows, knee = apa_lambda_ladder(exponents=range(4, 31))
    errs = {r["t"]: r["error"] for r in rows}
    assert 10 < knee < 30
    # before the knee every halving of lambda shrinks the error
    assert all(errs[t + 1] <= errs[t] for t in range(4, knee - 2))
    assert errs[30] > errs[knee]


def test_crossover_table_counts():
    rows = crossover_table(strassen2x2(), [2, 4, 1024], cutoff=1, reps=1, time_limit_size=4)
    assert [r.size for r in rows] == [2, 4, 1024]
    assert first_win(rows, "opcount_win") == 1024
    assert np.isnan(rows[-1].fast_seconds)
    never = crossover_table(winograd2x2(), [8], cutoff=8, reps=1, time_limit_size=0)
    assert not never[0].opcount_win and first_win(never, "opcount_win") is None


def test_count_check_and_timer():
    measured, predicted = count_check(winograd2x2(), 12, 3)
    assert measured == predicted
    assert time_min(lambda: None, reps=2) >= 0


def test_seeded_inputs_have_bounded_entries():
    A = seeded_random_matrix(30, 30, "int", 4, ring="f64")
    assert np.abs(A).max() <= 9
