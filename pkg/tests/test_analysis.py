from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from neurocog import analysis
from neurocog.analysis import RunSet, StatisticsError

BASE = (0.525, 0.505, 0.320, 0.035)
NO_REASONING = (0.690, 0.690, 0.635, 0.460)


def _t_two_sided_oracle(t: float, df: int) -> float:
    """2 * integral of the Student t density beyond |t|, by adaptive quadrature."""
    mpmath.mp.dps = 30
    nu = mpmath.mpf(df)
    c = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
    tail = mpmath.quad(lambda x: c * (1 + x * x / nu) ** (-(nu + 1) / 2), [abs(t), mpmath.inf])
    return float(2 * tail)


def _key(model="m", task="swm"):
    return (model, task, "easy", "text", "base")


# -- descriptive -------------------------------------------------------------


def test_population_std_convention():
    m, s, n = analysis.aggregate([{"x": 0}, {"x": 0}, {"x": 1}])["x"]
    assert (round(m, 3), round(s, 3), n) == (0.333, 0.471, 3)
    assert abs(round(s, 2) - 0.47) <= 0.005


def test_single_and_constant_runs():
    assert analysis.aggregate([{"x": 0.7}])["x"] == (0.7, 0.0, 1)
    assert analysis.aggregate([{"x": 1}] * 3)["x"] == (1.0, 0.0, 3)


def test_aggregate_skips_flags_and_needs_runs():
    agg = analysis.aggregate([{"x": 1, "ok": True, "name": "a"}])
    assert list(agg) == ["x"]
    with pytest.raises(StatisticsError):
        analysis.aggregate([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=12), st.randoms())
def test_aggregate_is_permutation_invariant(vals, rnd):
    runs = [{"x": v} for v in vals]
    shuffled = runs[:]
    rnd.shuffle(shuffled)
    a, b = analysis.aggregate(runs)["x"], analysis.aggregate(shuffled)["x"]
    assert a[0] == pytest.approx(b[0], abs=1e-9) and a[1] == pytest.approx(b[1], abs=1e-9)


def test_runset_rejects_foreign_key():
    rs = RunSet(_key())
    with pytest.raises(ValueError):
        rs.add(_key("other"), {"x": 1})


# -- t distribution ----------------------------------------------------------


@pytest.mark.parametrize("t", [0.0, 0.1, 0.5, 1.0, 1.96, 2.5, 3.0, 4.66, 8.0, 25.0])
@pytest.mark.parametrize("df", [1, 2, 3, 5, 8, 10, 30, 120])
def test_t_p_values_match_numeric_integration(t, df):
    assert analysis.t_sf_two_sided(t, df) == pytest.approx(_t_two_sided_oracle(t, df), abs=1e-6)


def test_t_cdf_symmetry_and_limits():
    for df in (1, 4, 17):
        for t in (0.3, 1.7, 6.0):
            assert analysis.t_cdf(t, df) + analysis.t_cdf(-t, df) == pytest.approx(1.0, abs=1e-12)
    assert analysis.t_cdf(0.0, 3) == 0.5


def test_cauchy_case_closed_form():
    # df = 1 is the Cauchy distribution: two-sided p = 1 - 2 atan(|t|) / pi
    for t in (0.2, 1.0, 3.0, 40.0):
        assert analysis.t_sf_two_sided(t, 1) == pytest.approx(1 - 2 * math.atan(t) / math.pi, abs=1e-12)


# -- paired t-test -----------------------------------------------------------


def test_text_mc_regression():
    res = analysis.paired_t_test(BASE, NO_REASONING)
    # exact t from rational arithmetic on the differences
    d = [Fraction(str(y)) - Fraction(str(x)) for x, y in zip(BASE, NO_REASONING)]
    md = sum(d) / 4
    var = sum((v - md) ** 2 for v in d) / 3
    t_exact = float(md) / math.sqrt(float(var) / 4)
    assert res.statistic == pytest.approx(t_exact, rel=1e-12)
    assert res.df == 3
    assert res.p == pytest.approx(0.0207, abs=0.002)
    assert res.p == pytest.approx(_t_two_sided_oracle(t_exact, 3), abs=1e-6)


def test_paired_t_small_cases():
    res = analysis.paired_t_test([0, 0], [1, 3])
    assert (res.statistic, res.df) == (2.0, 1)
    same = analysis.paired_t_test([1, 2, 3], [1, 2, 3])
    assert (same.statistic, same.p, same.degenerate) == (0.0, 1.0, True)
    shift = analysis.paired_t_test([1, 2, 3], [2, 3, 4])
    assert shift.statistic == math.inf and shift.p == 0.0 and shift.degenerate


def test_paired_t_input_errors():
    with pytest.raises(StatisticsError):
        analysis.paired_t_test([1], [2])
    with pytest.raises(StatisticsError):
        analysis.paired_t_test([1, 2], [2])


_vals = st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=10)


@given(st.data())
def test_paired_t_antisymmetry(data):
    xs = data.draw(_vals)
    ys = data.draw(st.lists(st.floats(-100, 100), min_size=len(xs), max_size=len(xs)))
    a, b = analysis.paired_t_test(xs, ys), analysis.paired_t_test(ys, xs)
    assert a.statistic == pytest.approx(-b.statistic, rel=1e-9, abs=1e-12) or (
        math.isinf(a.statistic) and a.statistic == -b.statistic)
    assert a.p == pytest.approx(b.p, abs=1e-12)
    assert 0 <= a.p <= 1


# -- Pearson -----------------------------------------------------------------


def test_pearson_examples():
    xs = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert analysis.pearson_r(xs, [2 * x + 1 for x in xs]).statistic == pytest.approx(1.0)
    assert analysis.pearson_r([1, 2, 3], [6, 4, 2]).statistic == pytest.approx(-1.0)
    res = analysis.pearson_r([1, 2, 3, 4], [1, 3, 2, 4])
    assert res.statistic == pytest.approx(0.8) and res.df == 2
    t = 0.8 * math.sqrt(2 / (1 - 0.64))
    assert res.p == pytest.approx(_t_two_sided_oracle(t, 2), abs=1e-6)


def test_pearson_zero_variance_is_error():
    with pytest.raises(StatisticsError):
        analysis.pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatisticsError):
        analysis.pearson_r([1, 2], [1, 2])


def _spread(xs):
    return max(xs) - min(xs) > 1e-3


@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=3, max_size=12),
       st.floats(0.1, 10), st.floats(-10, 10))
def test_pearson_affine_invariance(pairs, scale, shift):
    xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
    assume(_spread(xs) and _spread(ys))
    base = analysis.pearson_r(xs, ys)
    moved = analysis.pearson_r([scale * x + shift for x in xs], ys)
    flipped = analysis.pearson_r(xs, [-scale * y + shift for y in ys])
    assert moved.statistic == pytest.approx(base.statistic, abs=1e-7)
    assert flipped.statistic == pytest.approx(-base.statistic, abs=1e-7)


def test_pearson_ten_entry_columns():
    rng = random.Random(4)
    xs = [rng.random() for _ in range(10)]
    ys = [x + 0.3 * rng.random() for x in xs]
    res = analysis.pearson_r(xs, ys)
    assert res.df == 8 and 0 < res.statistic < 1 and 0 <= res.p < 0.05


def test_stat_result_contract():
    with pytest.raises(ValueError):
        analysis.StatResult(1.0, 1, 1.5)
    with pytest.raises(ValueError):
        analysis.StatResult(1.0, 0, 0.5)


# -- export ------------------------------------------------------------------


def test_empty_export_is_header_only(tmp_path):
    analysis.export_report([], {}, tmp_path / "r.csv", tmp_path / "s.json")
    assert (tmp_path / "r.csv").read_text() == ",".join(analysis.CSV_COLUMNS) + "\n"


def test_three_run_set_row(tmp_path):
    rs = RunSet(_key(), [{"s_swm": 1.0}, {"s_swm": 0.5}, {"s_swm": 0.0}], "abc", 7)
    rows = analysis.report_rows([rs])
    assert len(rows) == 1
    row = rows[0]
    assert row["n"] == 3 and float(row["mean"]) == 0.5
    assert row["config_digest"] == "abc" and row["master_seed"] == 7


def test_export_is_byte_deterministic(tmp_path):
    sets = analysis.group_runs([(_key(task=t), {"a": i * 0.1, "b": i}) for i, t in
                                enumerate(["swm", "wcst", "swm", "wcst", "swm"])])
    stats = {"paired:x|y": analysis.paired_t_test(BASE, NO_REASONING)}
    outs = []
    for k in range(2):
        c, j = tmp_path / f"{k}.csv", tmp_path / f"{k}.json"
        analysis.export_report(list(reversed(sets)) if k else sets, stats, c, j, {"seed": 1})
        outs.append((c.read_bytes(), j.read_bytes()))
    assert outs[0] == outs[1]
