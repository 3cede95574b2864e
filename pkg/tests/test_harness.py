import json

import pytest

from femagents.backends import ScriptedBackend
from femagents.chat import StepTrace
from femagents.config import ExperimentConfig, OracleConfig
from femagents.fem import NodalField, solve_step, write_field
from femagents.harness import (
    classify_step,
    derive_seed,
    detect_software,
    read_records,
    run_matrix,
    run_trial,
)
from femagents.sandbox import ExecutionResult
from femagents.transcript import Transcript


def _trace(*results):
    t = StepTrace(1, termination="success_path")
    t.executions = list(results)
    return t


def test_l1_success_with_image(tmp_path):
    (tmp_path / "1.png").write_bytes(b"x" * 1024)
    out = classify_step(tmp_path, 1, "L1", _trace(ExecutionResult(0, "", produced_files=[("1.png", 1024)])))
    assert out.success and out.l0_executed and out.l1_artifact


def test_l1_artifact_missing(tmp_path):
    out = classify_step(tmp_path, 1, "L1", _trace(ExecutionResult(0, "")))
    assert not out.success and out.reason == "artifact_missing"


def test_last_execution_decides_l0(tmp_path):
    ok = ExecutionResult(0, "", produced_files=[("2.png", 10)])
    assert not classify_step(tmp_path, 2, "L0", _trace(ok, ExecutionResult(1, ""))).success
    assert classify_step(tmp_path, 2, "L1", _trace(ExecutionResult(1, ""), ok)).success


def test_later_steps_accept_any_new_image(tmp_path):
    out = classify_step(tmp_path, 3, "L1", _trace(ExecutionResult(0, "", produced_files=[("plot.jpg", 3), ("u.txt", 9)])))
    assert out.success
    out = classify_step(tmp_path, 3, "L1", _trace(ExecutionResult(0, "", produced_files=[("empty.png", 0)])))
    assert not out.success


def test_without_executor_success_path_counts_as_l0(tmp_path):
    out = classify_step(tmp_path, 1, "L0", StepTrace(1, termination="success_path"), has_executor=False)
    assert out.success


ORACLE = OracleConfig(n=10)


def _l2(tmp_path, step, field):
    write_field(field, tmp_path / ("sxy4.txt" if step == 4 else f"u{step}.txt"))
    return classify_step(tmp_path, step, "L2", _trace(ExecutionResult(0, "", produced_files=[(f"{step}.png", 5)])),
                         oracle=ORACLE, tolerance=0.05)


def test_l2_matches_oracle(tmp_path):
    out = _l2(tmp_path, 3, solve_step(3, 10)[0])
    assert out.l2_verified and out.success and out.oracle_error == 0.0


def test_l2_twenty_percent_off_fails(tmp_path):
    u, _ = solve_step(2, 10)
    out = _l2(tmp_path, 2, NodalField(u.points, 1.2 * u.values))
    assert not out.success and out.reason == "oracle_mismatch"
    assert out.oracle_error == pytest.approx(0.2, rel=1e-9)


def test_l2_stress(tmp_path):
    assert _l2(tmp_path, 4, solve_step(4, 10)[1]).success


def test_l2_field_missing(tmp_path):
    out = classify_step(tmp_path, 1, "L2", _trace(ExecutionResult(0, "", produced_files=[("1.png", 5)])), oracle=ORACLE)
    assert out.l2_verified is None and out.reason == "field_missing" and not out.success


def test_l2_garbage_field(tmp_path):
    (tmp_path / "u1.txt").write_text("nonsense\n")
    out = classify_step(tmp_path, 1, "L2", _trace(ExecutionResult(0, "", produced_files=[("1.png", 5)])), oracle=ORACLE)
    assert out.l2_verified is False and out.reason.startswith("field_invalid")


@pytest.mark.parametrize("text, software", [
    ("I will use FEniCS for the Python code", "fenics"),
    ("the Finite Element Analysis software Abaqus", "abaqus"),
    ("We go with ANSYS, then maybe FEniCS", "other"),
    ("Let us write the code.", "other"),
])
def test_detect_software(text, software):
    t = Transcript()
    t.append("User", "q", 1, "prompt")
    t.append("Planner", text, 1)
    assert detect_software(t) == software


def test_no_planner_messages():
    assert detect_software(Transcript()) == "none"


def test_seed_derivation_is_stable():
    assert derive_seed(0, "Eng+Exe", 3) == derive_seed(0, "Eng+Exe", 3)
    assert derive_seed(0, "Eng+Exe", 3) != derive_seed(0, "Eng+Exe", 4)


def test_engineer_without_code_fails_every_step(tmp_path):
    cfg = ExperimentConfig(combinations=["Eng+Exe"], n_runs=1, query="q1")
    cfg.chat.max_turns = 4
    rec = run_trial("Eng+Exe", cfg, 0, tmp_path, backend=ScriptedBackend({"Engineer": ["I need to think."] * 100}))
    assert [s.termination for s in rec.steps] == ["turn_limit"] * 4
    assert not any(s.success for s in rec.steps)
    assert rec.planner_software == "none"
    assert (tmp_path / rec.transcript).is_file()


@pytest.fixture(scope="module")
def small_matrix(tmp_path_factory):
    from tests.conftest import FAST_PYTHON

    out = tmp_path_factory.mktemp("matrix")
    cfg = ExperimentConfig(
        combinations=["Eng+Exe", "Eng+Exp1", "Plan+Eng+Exe+Exp"], n_runs=4, seed=7, level="L2",
    )
    cfg.sandbox.interpreter_cmd = FAST_PYTHON
    cfg.oracle.n = 8
    return out, cfg, run_matrix(cfg, out)


def test_recount_from_jsonl(small_matrix):
    out, cfg, _ = small_matrix
    raw = [json.loads(line) for line in (out / "records.jsonl").read_text().splitlines()]
    rows = (out / "results.csv").read_text().splitlines()[1:]
    for row in rows:
        combo, scen, n, k, *_, flt = row.split(",")
        group = [r for r in raw if r["combination"] == combo and (not flt or r["planner_software"] == flt)]
        idx = {"Displacement": [0], "ShearDisplacement": [1], "Hole": [2], "Stress": [3], "Complex": [2, 3]}[scen]
        level_key = "l2_verified"
        count = sum(all(r["steps"][i][level_key] for i in idx) for r in group)
        assert (int(n), int(k)) == (len(group), count)


def test_levels_are_monotone(small_matrix):
    out, _, _ = small_matrix
    for rec in read_records(out / "records.jsonl"):
        assert rec.planner_software == ("none" if "Plan" not in rec.combination else rec.planner_software)
        for s in rec.steps:
            assert (not s.l2_verified) or s.l1_artifact
            assert (not s.l1_artifact) or s.l0_executed


def test_matrix_writes_figures(small_matrix):
    out, _, _ = small_matrix
    assert (out / "figures" / "all.svg").is_file()
    assert (out / "trials" / "Eng_Exe" / "trial_000" / "transcript.jsonl").is_file()
