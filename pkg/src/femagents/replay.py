"""Re-driving recorded conversations: bundled fixtures and saved transcripts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .backends import ScriptedBackend
from .chat import ChatConfig, SessionState, run_step
from .roles import AgentKind, lookup_role, resolve_combination
from .sandbox import ExecutionResult, ScriptedSandbox, parse_feedback
from .transcript import AGENT, EXECUTOR_FEEDBACK, PROMPT, Transcript

FIXTURES = ("conversation_1", "conversation_2", "conversation_3", "conversation_5", "conversation_8")


@dataclass
class Fixture:
    name: str
    combination: str
    query: str
    step: int
    agents: dict[str, list[str]]
    executions: list[dict] = field(default_factory=list)
    note: str = ""

    def backend(self) -> ScriptedBackend:
        return ScriptedBackend({(self.step, agent): msgs for agent, msgs in self.agents.items()})

    def sandbox(self) -> ScriptedSandbox:
        results = [ExecutionResult(e["exit_code"], e["output"], produced_files=e.get("produced_files", []))
                   for e in self.executions]
        return ScriptedSandbox({self.step: results})


def load_fixture(name: str) -> Fixture:
    text = resources.files("femagents.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return Fixture(**json.loads(text))


def _roles_from_transcript(t: Transcript, combination: Optional[str]):
    if combination:
        return resolve_combination(combination)
    names = {m.sender for m in t.messages if m.kind == AGENT}
    roles = [lookup_role(n) for n in sorted(names)]
    if any(m.kind == EXECUTOR_FEEDBACK for m in t.messages):
        roles.append(lookup_role("Exe"))
    if not any(r.kind is AgentKind.ENGINEER for r in roles):
        roles.append(lookup_role("Eng"))
    return resolve_combination([r.abbreviation for r in roles])


def replay_transcript(t: Transcript, combination: Optional[str] = None, config: Optional[ChatConfig] = None) -> Transcript:
    """Run the session again with every agent reply and execution taken from ``t``."""
    queues: dict = {}
    executions: dict[int, list[ExecutionResult]] = {}
    for m in t.messages:
        if m.kind == AGENT:
            queues.setdefault((m.step, m.sender), []).append(m.content)
        elif m.kind == EXECUTOR_FEEDBACK:
            parsed = parse_feedback(m.content) or ExecutionResult(1, m.content)
            executions.setdefault(m.step, []).append(parsed)
    roles = _roles_from_transcript(t, combination)
    config = config or ChatConfig()
    # recorded outputs were already capped; do not cut them again
    cap = max([len(r.output) for rs in executions.values() for r in rs] + [1])
    state = SessionState(roles, config=config)
    state.transcript.metadata = dict(t.metadata)
    backend = ScriptedBackend(queues)
    sandbox = ScriptedSandbox(executions, output_cap=cap)
    for m in t.messages:
        if m.kind == PROMPT:
            run_step(state, m.content, backend, sandbox, step=m.step)
    return state.transcript
