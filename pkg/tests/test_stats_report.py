import math
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm
from statsmodels.stats.proportion import proportion_confint

from femagents.report import CSV_HEADER, PLOT_H, emit_report, read_results_csv, render_svg, write_results_csv
from femagents.stats import RateSummary, aggregate, rate_summary, wilson_interval

# statsmodels "wilson" evaluations at alpha = 2*(1 - Phi(1.96)), computed before the build
PINNED = {
    (33, 40): (0.6804970794560756, 0.9125469700311692),
    (39, 40): (0.8711834051199223, 0.9955732825922052),
    (5, 40): (0.054594197735412825, 0.26112420670238146),
    (0, 40): (0.0, 0.08762453925039229),
    (40, 40): (0.9123754607496077, 1.0),
}


@pytest.mark.parametrize("k, n", sorted(PINNED))
def test_wilson_pinned(k, n):
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(PINNED[k, n][0], abs=1e-9)
    assert hi == pytest.approx(PINNED[k, n][1], abs=1e-9)


def test_rates_match_reported_values():
    assert rate_summary(39, 40).rate == 0.975
    assert rate_summary(5, 40).rate == 0.125
    assert rate_summary(0, 40).wilson_lo == 0.0
    assert rate_summary(28, 40).rate == 0.7


@pytest.mark.parametrize("k, n", [(0, 0), (-1, 4), (5, 4)])
def test_wilson_rejects_bad_counts(k, n):
    with pytest.raises(ValueError):
        wilson_interval(k, n)


@given(st.integers(1, 500).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))),
       st.floats(0.5, 3.5))
def test_wilson_brackets_rate_and_matches_statsmodels(kn, z):
    k, n = kn
    s = rate_summary(k, n, z)
    assert 0.0 <= s.wilson_lo <= s.rate <= s.wilson_hi <= 1.0
    alpha = 2 * norm.sf(z)
    lo, hi = proportion_confint(k, n, alpha=alpha, method="wilson")
    assert s.wilson_lo == pytest.approx(max(0.0, min(lo, s.rate)), abs=1e-9)
    assert s.wilson_hi == pytest.approx(min(1.0, max(hi, s.rate)), abs=1e-9)


class Rec:
    def __init__(self, combination, oks, software="none"):
        self.combination = combination
        self.oks = oks
        self.planner_software = software

    def step_success(self, step):
        return self.oks[step - 1]


def test_aggregate_counts_and_complex():
    recs = [Rec("Eng+Exe", [True, True, i < 3, i < 2]) for i in range(4)]
    by = {s.scenario: s for s in aggregate(recs)}
    assert (by["Displacement"].successes, by["Hole"].successes, by["Stress"].successes) == (4, 3, 2)
    assert by["Complex"].successes == 2 and by["Complex"].n == 4


def test_plan_eng_exe_exp_seventy_percent():
    recs = [Rec("Plan+Eng+Exe+Exp", [i < 28] * 4, "fenics") for i in range(40)]
    assert aggregate(recs)[0].rate == pytest.approx(0.70)


def test_software_filter():
    recs = [Rec("Plan+Eng+Exe", [True] * 4, "fenics")] * 3 + [Rec("Plan+Eng+Exe", [False] * 4, "abaqus")] * 5
    s = aggregate(recs, software_filter="fenics")[0]
    assert (s.n, s.rate, s.software_filter) == (3, 1.0, "fenics")
    empty = aggregate(recs, software_filter="other")[0]
    assert empty.empty and math.isnan(empty.rate)


def test_csv_row_and_header(tmp_path):
    p = tmp_path / "r.csv"
    write_results_csv([rate_summary(39, 40, combination="Eng+Exe", scenario="Displacement")], p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("Eng+Exe,Displacement,40,39,0.975,")
    back = read_results_csv(p)[0]
    assert back.rate == 0.975 and back.wilson_lo == pytest.approx(PINNED[39, 40][0], abs=1e-9)


def test_empty_csv(tmp_path):
    p = tmp_path / "r.csv"
    write_results_csv([], p)
    assert p.read_text() == ",".join(CSV_HEADER) + "\n"


def test_bar_height_is_linear():
    svg = render_svg([rate_summary(20, 40, combination="Eng+Exe", scenario="Displacement")])
    h = float(re.search(r'class="bar"[^>]*height="([\d.]+)"', svg).group(1))
    assert abs(h - PLOT_H / 2) <= 1
    assert ">0.500<" in svg


def test_empty_summaries_left_out_of_charts(tmp_path):
    empty = RateSummary("Plan+Eng+Exe", "Displacement", 0, 0, *[float("nan")] * 3, "fenics")
    full = rate_summary(1, 2, combination="Eng+Exe", scenario="Displacement")
    paths = emit_report([empty, full], tmp_path)
    names = sorted(p.name for p in paths)
    assert "fig3_planner.svg" not in names and "all.svg" in names
    assert 'data-combination="Plan+Eng+Exe' not in (tmp_path / "figures" / "all.svg").read_text()
