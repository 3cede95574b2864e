"""Code-block extraction, sandboxed execution and Executor feedback text."""

from __future__ import annotations

import os
import re
import shlex
import signal
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

FENCE = "```"
TRUNCATION_MARKER = "[...truncated...]"
TIMEOUT_EXIT = 124
MISSING_INTERPRETER_EXIT = 127

_SUFFIXES = {"": ".py", "python": ".py", "py": ".py", "python3": ".py", "sh": ".sh", "bash": ".sh"}


class SandboxError(Exception):
    pass


class InterpreterNotFound(SandboxError):
    """The configured interpreter binary does not exist (software unavailable)."""


@dataclass(frozen=True)
class CodeBlock:
    body: str
    language_tag: Optional[str] = None
    source_message_index: int = -1


@dataclass
class ExecutionResult:
    exit_code: int
    output: str = ""
    duration: float = 0.0
    timed_out: bool = False
    produced_files: list[tuple[str, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


@dataclass(frozen=True)
class ExecLimits:
    wall_timeout: float = 120.0
    output_cap: int = 2000

    def __post_init__(self):
        if self.wall_timeout <= 0 or self.output_cap <= 0:
            raise ValueError("limits must be positive")


def extract_code_blocks(text: str, message_index: int = -1) -> list[CodeBlock]:
    """Return triple-backtick blocks in document order.

    An opening fence may carry a language tag. A fence left open at the end of
    the text is closed implicitly. Inline single-backtick spans are ignored
    because only lines starting with a fence count.
    """
    blocks = []
    tag = None
    body: list[str] | None = None
    for line in text.split("\n"):
        stripped = line.strip()
        if body is None:
            if stripped.startswith(FENCE):
                tag = stripped[len(FENCE):].strip() or None
                body = []
        elif stripped.startswith(FENCE) and not stripped[len(FENCE):].strip():
            blocks.append(CodeBlock("\n".join(body), tag, message_index))
            body = None
        else:
            body.append(line)
    if body is not None:
        blocks.append(CodeBlock("\n".join(body), tag, message_index))
    return blocks


def render_code_block(block: CodeBlock) -> str:
    return f"{FENCE}{block.language_tag or ''}\n{block.body}\n{FENCE}"


def _inventory(root: Path) -> dict[str, int]:
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            p = Path(dirpath, name)
            try:
                out[p.relative_to(root).as_posix()] = p.stat().st_size
            except OSError:
                pass
    return out


def source_name(step: int, version: int, index: int, tag: Optional[str] = None) -> str:
    suffix = _SUFFIXES.get((tag or "").lower(), "." + re.sub(r"\W", "", tag or "") if tag else ".py")
    return f"step{step}_v{version}_b{index}{suffix}"


def execute_blocks(
    blocks: Sequence[CodeBlock],
    workspace,
    limits: ExecLimits = ExecLimits(),
    interpreter_cmd: str = "python3",
    step: int = 1,
    version: int = 1,
) -> ExecutionResult:
    """Save each block into the workspace and run them in order.

    Execution stops at the first nonzero exit; the returned result describes
    the last block that ran, with ``produced_files`` covering the whole run.
    Raises InterpreterNotFound when the interpreter binary is missing.
    """
    ws = Path(workspace).resolve()
    if not ws.is_dir():
        raise SandboxError(f"workspace {ws} does not exist")
    argv = shlex.split(interpreter_cmd)
    names = []
    for i, block in enumerate(blocks):
        name = source_name(step, version, i, block.language_tag)
        (ws / name).write_text(block.body + "\n")
        names.append(name)
    before = _inventory(ws)

    result = ExecutionResult(exit_code=0)
    start = time.monotonic()
    for name in names:
        result = _run_one(argv + [name], ws, limits.wall_timeout)
        if not result.ok:
            break
    after = _inventory(ws)
    result.duration = time.monotonic() - start
    result.produced_files = sorted((p, s) for p, s in after.items() if p not in before)
    return result


def _run_one(argv: list[str], cwd: Path, timeout: float) -> ExecutionResult:
    try:
        proc = subprocess.Popen(
            argv,
            cwd=cwd,
            stdin=subprocess.DEVNULL,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            start_new_session=True,
        )
    except FileNotFoundError as exc:
        raise InterpreterNotFound(f"interpreter not found: {argv[0]}") from exc
    timed_out = False
    try:
        raw, _ = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        timed_out = True
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        raw, _ = proc.communicate()
    output = raw.decode("utf-8", errors="replace")
    # tracebacks would otherwise leak the absolute workspace path
    output = output.replace(str(cwd) + os.sep, "")
    if timed_out:
        output += f"\nTimeout: execution exceeded {timeout:g} s"
        return ExecutionResult(TIMEOUT_EXIT, output, timed_out=True)
    return ExecutionResult(proc.returncode, output)


def cap_output(output: str, cap: int) -> str:
    if len(output) <= cap:
        return output
    return output[:cap] + "\n" + TRUNCATION_MARKER


def format_feedback(result: ExecutionResult, output_cap: int = ExecLimits.output_cap) -> str:
    status = "execution succeeded" if result.exit_code == 0 else "execution failed"
    return f"exitcode: {result.exit_code} ({status})\nCode output:\n{cap_output(result.output, output_cap)}"


_FEEDBACK_RE = re.compile(r"exitcode: (-?\d+) \((execution succeeded|execution failed)\)\nCode output:\n", re.S)


def parse_feedback(text: str) -> ExecutionResult | None:
    """Inverse of format_feedback (output as capped); None if not feedback."""
    m = _FEEDBACK_RE.match(text)
    if m is None:
        return None
    return ExecutionResult(int(m.group(1)), text[m.end():])


class Sandbox:
    """Executes code for one trial workspace."""

    def __init__(self, workspace, limits: ExecLimits = ExecLimits(), interpreter_cmd: str = "python3"):
        self.workspace = Path(workspace)
        self.limits = limits
        self.interpreter_cmd = interpreter_cmd
        self.workspace.mkdir(parents=True, exist_ok=True)

    def execute(self, blocks, step: int = 1, version: int = 1) -> ExecutionResult:
        return execute_blocks(blocks, self.workspace, self.limits, self.interpreter_cmd, step, version)


class ScriptedSandbox:
    """Returns pre-recorded execution results instead of running anything.

    ``results`` is either a flat list consumed in order or a mapping
    step -> list. Used to replay transcripts whose code cannot run here.
    """

    def __init__(self, results, output_cap: int = ExecLimits.output_cap):
        self.limits = ExecLimits(output_cap=output_cap)
        if isinstance(results, dict):
            self._queues = {int(k): list(v) for k, v in results.items()}
        else:
            self._queues = {None: list(results)}
        self.calls: list[tuple[int, int, list[CodeBlock]]] = []

    def execute(self, blocks, step: int = 1, version: int = 1) -> ExecutionResult:
        self.calls.append((step, version, list(blocks)))
        queue = self._queues.get(step, self._queues.get(None))
        if not queue:
            raise SandboxError(f"no scripted execution result left for step {step}")
        r = queue.pop(0)
        return ExecutionResult(r.exit_code, r.output, r.duration, r.timed_out, list(r.produced_files))
