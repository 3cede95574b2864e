"""Re-driving the published example conversations.

Each fixture holds the agent messages and execution results of one example
conversation. Running it through the chat loop reproduces the flow and lets
the grader classify it.
"""

import tempfile

from femagents.chat import SessionState, run_step
from femagents.config import ExperimentConfig
from femagents.harness import run_trial
from femagents.queries import query_steps
from femagents.replay import FIXTURES, load_fixture, replay_transcript
from femagents.roles import resolve_combination
from femagents.transcript import transcript_hash

with tempfile.TemporaryDirectory() as out:
    for name in FIXTURES:
        fx = load_fixture(name)
        cfg = ExperimentConfig(combinations=[fx.combination], n_runs=1, query=fx.query)
        rec = run_trial(fx.combination, cfg, 0, f"{out}/{name}", backend=fx.backend(), sandbox=fx.sandbox())
        s = rec.steps[fx.step - 1]
        print(f"{name}: {fx.combination:<20} software={rec.planner_software:<7} step {fx.step}: "
              f"{s.termination}, {s.executor_attempts} runs, L0={s.l0_executed}")
        print(f"    {fx.note}")

# The saved transcript replays to the same messages.
fx = load_fixture("conversation_8")
state = SessionState(resolve_combination(fx.combination))
run_step(state, query_steps(fx.query)[fx.step - 1], fx.backend(), fx.sandbox(), step=fx.step)
again = replay_transcript(state.transcript, fx.combination)
print("\nreplayed transcript identical:", transcript_hash(again) == transcript_hash(state.transcript))
