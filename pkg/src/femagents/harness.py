"""Benchmark runner: trials over agent combinations, step classification, persistence."""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import re
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .backends import HTTPBackend, RecordingBackend, ReplayBackend, StochasticScript
from .chat import SUCCESS_PATH, SessionState, StepTrace, run_session
from .config import ExperimentConfig, OracleConfig
from .fem import FieldFormatError, Material, IncomparableFieldsError, compare_fields, hole_mask, read_field, solve_step
from .queries import field_file_name, query_steps
from .report import emit_report
from .roles import AgentKind, resolve_combination
from .sandbox import ExecLimits, Sandbox
from .stats import SCENARIOS, aggregate
from .transcript import Transcript, write_transcript

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".svg", ".pdf", ".gif")
KNOWN_TOOLS = (
    "fenics", "abaqus", "ansys", "comsol", "calculix", "code_aster", "code-aster", "sfepy", "getfem",
    "deal.ii", "firedrake", "nastran", "ls-dyna", "scikit-fem", "skfem", "elmer", "moose", "openfoam",
)


@dataclass
class StepOutcome:
    step: int
    scenario: str
    l0_executed: bool
    l1_artifact: bool
    l2_verified: Optional[bool] = None
    termination: str = ""
    executor_attempts: int = 0
    level: str = "L1"
    reason: str = ""
    oracle_error: Optional[float] = None

    @property
    def success(self) -> bool:
        if self.level == "L0":
            return self.l0_executed
        if self.level == "L1":
            return self.l1_artifact
        return bool(self.l2_verified)


@dataclass
class TrialRecord:
    combination: str
    trial: int
    seed: int
    transcript: str
    steps: list[StepOutcome]
    planner_software: str
    wall_time: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def step_success(self, step: int) -> bool:
        return self.steps[step - 1].success

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        d = dict(d)
        d["steps"] = [StepOutcome(**s) for s in d["steps"]]
        return cls(**d)


def derive_seed(seed: int, combination: str, trial: int) -> int:
    digest = hashlib.sha256(f"{seed}|{combination}|{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def detect_software(transcript: Transcript, planner: str = "Planner") -> str:
    """Software named first in the Planner's messages: fenics, abaqus, other or none."""
    said = [m.content for m in transcript.messages if m.sender == planner]
    if not said:
        return "none"
    pattern = re.compile("|".join(re.escape(t) for t in KNOWN_TOOLS), re.I)
    for text in said:
        m = pattern.search(text)
        if m:
            word = m.group(0).lower()
            return word if word in ("fenics", "abaqus") else "other"
    return "other"


def _reference(step: int, oracle: OracleConfig):
    return _cached_reference(step, oracle.n, oracle.E, oracle.nu, oracle.formulation, oracle.shear_y_only)


@functools.lru_cache(maxsize=32)
def _cached_reference(step, n, E, nu, formulation, shear_y_only):
    u, sxy = solve_step(step, n, Material(E, nu, formulation), shear_y_only)
    return sxy if step == 4 else u


def classify_step(
    workspace,
    step: int,
    level: str,
    trace: StepTrace,
    has_executor: bool = True,
    oracle: OracleConfig = OracleConfig(),
    tolerance: float = 0.05,
) -> StepOutcome:
    """Grade a step: L0 ran cleanly, L1 also left its image, L2 also matches the oracle."""
    ws = Path(workspace)
    if has_executor:
        l0 = bool(trace.executions) and trace.executions[-1].exit_code == 0
    else:
        l0 = trace.termination == SUCCESS_PATH
    produced = {p: s for r in trace.executions for p, s in r.produced_files}
    if step == 1:
        img = ws / "1.png"
        has_image = produced.get("1.png", 0) > 0 or (img.is_file() and img.stat().st_size > 0)
    else:
        has_image = any(p.lower().endswith(IMAGE_SUFFIXES) and s > 0 for p, s in produced.items())
    l1 = l0 and has_image
    out = StepOutcome(
        step, SCENARIOS[step], l0, l1, None, trace.termination, trace.executor_attempts, level
    )
    if not l0:
        out.reason = "not_executed" if has_executor else trace.termination
    elif not l1 and level != "L0":
        out.reason = "artifact_missing"
    if level != "L2":
        return out
    path = ws / field_file_name(step)
    if not path.is_file():
        if l1:
            out.reason = "field_missing"
        return out
    try:
        err = compare_fields(
            read_field(path), _reference(step, oracle), oracle.probe,
            exclude=hole_mask() if step >= 3 else None,
        )
    except (FieldFormatError, IncomparableFieldsError, ValueError) as exc:
        out.l2_verified = False
        out.reason = out.reason or f"field_invalid: {exc}"
        return out
    out.oracle_error = err
    out.l2_verified = l1 and err <= tolerance
    if l1 and not out.l2_verified:
        out.reason = "oracle_mismatch"
    return out


def make_backend(config: ExperimentConfig, seed: int = 0, shared=None):
    b = config.backend
    if b.kind == "scripted":
        field_n = config.oracle.n if config.level == "L2" else None
        return StochasticScript(seed, b.p_success, b.p_fenics, field_n)
    if shared is not None:
        return shared
    if b.kind == "http":
        return HTTPBackend(b.base_url)
    if b.kind == "record":
        if not b.replay_dir:
            raise ValueError("backend.replay_dir is required for recording")
        return RecordingBackend(HTTPBackend(b.base_url), b.replay_dir)
    if not b.replay_dir:
        raise ValueError("backend.replay_dir is required for replay")
    return ReplayBackend(b.replay_dir)


def trial_dir(out_dir, combination: str, trial: int) -> Path:
    return Path(out_dir) / "trials" / combination.replace("+", "_") / f"trial_{trial:03d}"


def run_trial(
    combination: str,
    config: ExperimentConfig,
    trial: int = 0,
    out_dir=".",
    backend=None,
    sandbox=None,
) -> TrialRecord:
    """One four-step conversation for ``combination``; failures become data, never exceptions."""
    roles = resolve_combination(combination)
    label = "+".join(r.abbreviation for r in roles)
    seed = derive_seed(config.seed, label, trial)
    tdir = trial_dir(out_dir, label, trial)
    if tdir.exists():
        shutil.rmtree(tdir)
    tdir.mkdir(parents=True)
    if backend is None:
        backend = make_backend(config, seed)
    if sandbox is None:
        sandbox = Sandbox(
            tdir, ExecLimits(config.sandbox.timeout_s, config.sandbox.output_cap), config.sandbox.interpreter_cmd
        )
    query = config.query_for(label)
    state = SessionState(roles, config=config.chat)
    state.transcript.metadata = {
        "combination": label,
        "trial": trial,
        "seed": seed,
        "backend": getattr(backend, "name", type(backend).__name__),
        "model": config.chat.model,
        "query": query,
        "started_at": time.time(),
    }
    start = time.monotonic()
    traces = run_session(state, query_steps(query, request_fields=config.level == "L2"), backend, sandbox)
    wall = time.monotonic() - start
    state.transcript.metadata["finished_at"] = time.time()

    has_exe = any(r.kind is AgentKind.EXECUTOR for r in roles)
    has_planner = any(r.kind is AgentKind.PLANNER for r in roles)
    steps = [
        classify_step(tdir, t.step, config.level, t, has_exe, config.oracle, config.tolerance) for t in traces
    ]
    software = detect_software(state.transcript) if has_planner else "none"
    if has_planner and software == "none":
        software = "other"
    write_transcript(state.transcript, tdir / "transcript.jsonl")
    record = TrialRecord(
        label, trial, seed, (tdir / "transcript.jsonl").relative_to(Path(out_dir)).as_posix(),
        steps, software, wall,
        sum(t.prompt_tokens for t in traces), sum(t.completion_tokens for t in traces),
    )
    (tdir / "record.json").write_text(json.dumps(record.to_dict(), indent=1, sort_keys=True) + "\n")
    return record


def write_records(records, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_records(path) -> list[TrialRecord]:
    with open(path) as fh:
        return [TrialRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


def summarize(records, combinations=None):
    """Unfiltered summaries for everything plus FEniCS-only ones for Planner combinations."""
    summaries = aggregate(records, combinations=combinations)
    planned = [r for r in records if r.planner_software != "none"]
    if planned:
        order = [c for c in (combinations or []) if "Plan" in c.split("+")]
        summaries += aggregate(planned, software_filter="fenics", combinations=order)
    return summaries


def run_matrix(config: ExperimentConfig, out_dir) -> list[TrialRecord]:
    """Every combination times ``n_runs`` trials, then records, CSV and figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shared = None
    if config.backend.kind != "scripted":
        shared = make_backend(config)
    jobs = [(c, i) for c in config.combinations for i in range(config.n_runs)]

    def one(job):
        combo, i = job
        backend = make_backend(config, derive_seed(config.seed, combo, i), shared)
        return run_trial(combo, config, i, out, backend=backend)

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            records = list(pool.map(one, jobs))
    else:
        records = [one(j) for j in jobs]
    rank = {c: k for k, c in enumerate(config.combinations)}
    records.sort(key=lambda r: (rank[r.combination], r.trial))
    write_records(records, out / "records.jsonl")
    emit_report(summarize(records, config.combinations), out)
    return records
