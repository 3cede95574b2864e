"""Group-chat session state, speaker selection, verdicts and the per-step loop."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .backends import DEFAULT_MODEL, BackendError, ReplayMismatch, build_request
from .roles import AgentKind, AgentRole
from .sandbox import CodeBlock, ExecutionResult, InterpreterNotFound, SandboxError, extract_code_blocks
from .sandbox import format_feedback, parse_feedback
from .transcript import AGENT, EXECUTOR_FEEDBACK, PROMPT, USER, ChatMessage, Transcript

SUCCESS_PATH = "success_path"
TURN_LIMIT = "turn_limit"
ERROR_LIMIT = "error_limit"
BACKEND_ERROR = "backend_error"
REPLAY_MISMATCH = "replay_mismatch"
ENVIRONMENT_ERROR = "environment_error"
SANDBOX_ERROR = "sandbox_error"
SKIPPED = "skipped"

MISSING_INTERPRETER_EXIT = 127


class Verdict(str, enum.Enum):
    APPROVE = "approve"
    REVISE = "revise"
    NONE = "none"


class ExecutorStatus(str, enum.Enum):
    NONE = "none"
    FAILED = "failed"
    SUCCEEDED = "succeeded"


@dataclass(frozen=True)
class VerdictRules:
    revise_keywords: tuple[str, ...] = ("error", "issue", "incorrect", "missing", "suggest", "should")
    approve_phrases: tuple[str, ...] = ("looks good", "correct", "well-structured")


_FOOTER = re.compile(r"\[\[\s*VERDICT:\s*(approve|revise)\s*\]\]", re.I)


def _mentions(text: str, words: Sequence[str]) -> bool:
    # match at a word start so "errors" counts as "error" but "incorrect" is not "correct"
    return any(re.search(r"\b" + re.escape(w), text, re.I) for w in words)


def detect_verdict(message: str, rules: VerdictRules = VerdictRules()) -> Verdict:
    """Read an expert's verdict: an explicit footer wins, otherwise keywords decide."""
    footers = _FOOTER.findall(message)
    if footers:
        return Verdict(footers[-1].lower())
    if _mentions(message, rules.revise_keywords):
        return Verdict.REVISE
    if _mentions(message, rules.approve_phrases):
        return Verdict.APPROVE
    return Verdict.NONE


@dataclass
class ChatConfig:
    max_turns: int = 30
    max_errors: int = 6
    abort_on_failure: bool = False
    verdict_footer: bool = True
    verdict_rules: VerdictRules = VerdictRules()
    model: str = DEFAULT_MODEL
    temperature: float = 1.0
    max_tokens: int = 2048


@dataclass(frozen=True)
class StepDone:
    reason: str


@dataclass
class SessionState:
    roles: list[AgentRole]
    transcript: Transcript = field(default_factory=Transcript)
    config: ChatConfig = field(default_factory=ChatConfig)
    current_step: int = 0
    latest_code_version: int = 0
    latest_code: list[CodeBlock] = field(default_factory=list)
    step_code_versions: int = 0
    executor_status: ExecutorStatus = ExecutorStatus.NONE
    expert_verdicts: dict[str, Verdict] = field(default_factory=dict)
    turn_count: int = 0
    step_turns: int = 0
    error_count: int = 0

    def __post_init__(self):
        if not self.roles:
            raise ValueError("a session needs at least one role")
        names = [r.name for r in self.roles]
        if len(set(names)) != len(names):
            raise ValueError("role names must be unique within a session")
        self._by_name = {r.name: r for r in self.roles}

    @classmethod
    def from_transcript(cls, roles, transcript: Transcript, config: Optional[ChatConfig] = None) -> "SessionState":
        """Rebuild the state reached after ``transcript`` (counters included)."""
        state = cls(list(roles), config=config or ChatConfig())
        for m in transcript.messages:
            if m.kind == PROMPT:
                state.begin_step(m.step, m.content)
            else:
                state.record(m.sender, m.content, m.kind)
        state.transcript.metadata = dict(transcript.metadata)
        return state

    def role(self, name: str) -> Optional[AgentRole]:
        return self._by_name.get(name)

    def first(self, kind: AgentKind) -> Optional[AgentRole]:
        return next((r for r in self.roles if r.kind is kind), None)

    @property
    def experts(self) -> list[AgentRole]:
        return [r for r in self.roles if r.kind is AgentKind.EXPERT]

    def begin_step(self, step: int, prompt: str) -> ChatMessage:
        self.current_step = step
        self.step_turns = 0
        self.error_count = 0
        self.step_code_versions = 0
        self.executor_status = ExecutorStatus.NONE
        self.expert_verdicts = {}
        return self._append(USER, prompt, PROMPT)

    def record(self, sender: str, content: str, kind: str = AGENT) -> ChatMessage:
        role = self.role(sender)
        if kind == EXECUTOR_FEEDBACK:
            parsed = parse_feedback(content)
            ok = parsed is not None and parsed.exit_code == 0
            self.executor_status = ExecutorStatus.SUCCEEDED if ok else ExecutorStatus.FAILED
            self.error_count = 0 if ok else self.error_count + 1
        elif role is not None and role.kind is AgentKind.ENGINEER:
            msg_index = len(self.transcript)
            blocks = extract_code_blocks(content, msg_index)
            if blocks:
                self.latest_code_version += 1
                self.step_code_versions += 1
                self.latest_code = blocks
                self.executor_status = ExecutorStatus.NONE
                self.expert_verdicts = {}
        elif role is not None and role.kind is AgentKind.EXPERT:
            self.expert_verdicts[sender] = detect_verdict(content, self.config.verdict_rules)
        return self._append(sender, content, kind)

    def _append(self, sender, content, kind) -> ChatMessage:
        self.turn_count += 1
        self.step_turns += 1
        return self.transcript.append(sender, content, self.current_step, kind)


def _next_reviewer(state: SessionState) -> Optional[str]:
    for r in state.experts:
        if r.name not in state.expert_verdicts:
            return r.name
    return None


def _rule_table(state: SessionState) -> Union[str, StepDone]:
    msgs = state.transcript.messages
    last = msgs[-1] if msgs else None
    engineer = state.first(AgentKind.ENGINEER)
    eng = engineer.name if engineer else None
    executor = state.first(AgentKind.EXECUTOR)

    if last is None or last.kind == PROMPT:
        planner = state.first(AgentKind.PLANNER)
        return planner.name if planner else eng
    if last.kind == EXECUTOR_FEEDBACK:
        if state.executor_status is ExecutorStatus.SUCCEEDED:
            return _next_reviewer(state) or StepDone(SUCCESS_PATH)
        return eng
    role = state.role(last.sender)
    kind = role.kind if role else None
    if kind is AgentKind.PLANNER:
        return eng
    if kind is AgentKind.ENGINEER:
        wrote_code = bool(state.latest_code) and state.latest_code[0].source_message_index == last.index
        if wrote_code:
            if executor:
                return executor.name
            return _next_reviewer(state) or StepDone(SUCCESS_PATH)
        return _next_reviewer(state) or eng
    if kind is AgentKind.EXPERT:
        if state.expert_verdicts.get(last.sender) is Verdict.REVISE:
            return eng
        nxt = _next_reviewer(state)
        if nxt:
            return nxt
        executed = state.executor_status is ExecutorStatus.SUCCEEDED
        if state.step_code_versions and (executed or executor is None):
            return StepDone(SUCCESS_PATH)
        return eng
    return eng


def next_speaker(state: SessionState) -> Union[str, StepDone]:
    """Deterministic choice of the next agent, or the reason the step is over.

    Depends only on ``state``. Success is reported before the turn and error
    limits are checked, so a step that just finished is never cut short.
    """
    choice = _rule_table(state)
    if isinstance(choice, StepDone):
        return choice
    if state.error_count >= state.config.max_errors:
        return StepDone(ERROR_LIMIT)
    if state.step_turns >= state.config.max_turns:
        return StepDone(TURN_LIMIT)
    if choice is None:
        return StepDone(TURN_LIMIT)
    return choice


@dataclass
class StepTrace:
    step: int
    messages: list[ChatMessage] = field(default_factory=list)
    termination: str = ""
    executions: list[ExecutionResult] = field(default_factory=list)
    prompt_tokens: int = 0
    completion_tokens: int = 0
    detail: str = ""

    @property
    def executor_attempts(self) -> int:
        return len(self.executions)

    @property
    def succeeded(self) -> bool:
        return self.termination == SUCCESS_PATH


def run_step(state: SessionState, step_prompt: str, backend, sandbox=None, step: Optional[int] = None) -> StepTrace:
    """Post the prompt as the User and let agents talk until the step is done.

    Backend and sandbox failures end the step with a termination reason
    rather than an exception.
    """
    step = state.current_step + 1 if step is None else step
    start = len(state.transcript)
    state.begin_step(step, step_prompt)
    trace = StepTrace(step)
    while True:
        choice = next_speaker(state)
        if isinstance(choice, StepDone):
            trace.termination = choice.reason
            break
        role = state.role(choice)
        if role.kind is AgentKind.EXECUTOR:
            if sandbox is None:
                raise ValueError("an Executor needs a sandbox")
            try:
                result = sandbox.execute(state.latest_code, step, state.latest_code_version)
            except InterpreterNotFound as exc:
                result = ExecutionResult(MISSING_INTERPRETER_EXIT, str(exc))
                trace.executions.append(result)
                state.record(role.name, format_feedback(result, sandbox.limits.output_cap), EXECUTOR_FEEDBACK)
                trace.termination, trace.detail = ENVIRONMENT_ERROR, str(exc)
                break
            except SandboxError as exc:
                trace.termination, trace.detail = SANDBOX_ERROR, str(exc)
                break
            trace.executions.append(result)
            state.record(role.name, format_feedback(result, sandbox.limits.output_cap), EXECUTOR_FEEDBACK)
            continue
        request = build_request(state, role)
        try:
            resp = backend.complete(request)
        except ReplayMismatch as exc:
            trace.termination, trace.detail = REPLAY_MISMATCH, str(exc)
            break
        except BackendError as exc:
            trace.termination, trace.detail = BACKEND_ERROR, str(exc)
            break
        trace.prompt_tokens += resp.prompt_tokens
        trace.completion_tokens += resp.completion_tokens
        state.record(role.name, resp.text, AGENT)
    trace.messages = state.transcript.messages[start:]
    return trace


def run_session(state: SessionState, prompts: Sequence[str], backend, sandbox=None) -> list[StepTrace]:
    """Run every query step in order; later steps are skipped only with abort_on_failure."""
    traces = []
    for i, prompt in enumerate(prompts, start=1):
        if state.config.abort_on_failure and traces and not traces[-1].succeeded:
            traces.append(StepTrace(i, termination=SKIPPED))
            continue
        traces.append(run_step(state, prompt, backend, sandbox, step=i))
    return traces
