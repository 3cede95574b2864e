"""Chat-completion providers: OpenAI-compatible HTTP, scripted, record and replay."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from .roles import AgentKind
from .transcript import Transcript, transcript_hash  # noqa: F401  (re-exported)

logger = logging.getLogger(__name__)

API_KEY_ENV = "FEMAGENTS_API_KEY"
DEFAULT_MODEL = "gpt-3.5-turbo"
DEFAULT_BASE_URL = "https://api.openai.com"
VERDICT_SUFFIX = (
    "\n\nFinish every review with one last line that is exactly [[VERDICT: approve]] when the "
    "latest code needs no change, or [[VERDICT: revise]] when it does."
)


class BackendError(RuntimeError):
    pass


class ReplayMismatch(BackendError):
    pass


@dataclass(frozen=True)
class Turn:
    speaker: str
    text: str
    own: bool = False


@dataclass(frozen=True)
class ChatRequest:
    model: str
    system: str
    turns: tuple[Turn, ...] = ()
    temperature: float = 1.0
    max_tokens: int = 2048
    # routing hints for offline backends; not part of the fingerprint
    agent: str = ""
    step: int = 0

    def messages(self) -> list[dict]:
        out = [{"role": "system", "content": self.system}]
        for t in self.turns:
            if t.own:
                out.append({"role": "assistant", "content": t.text})
            else:
                out.append({"role": "user", "content": f"{t.speaker}: {t.text}"})
        return out

    def fingerprint(self) -> str:
        payload = {
            "system": self.system,
            "turns": [[t.speaker, t.text, t.own] for t in self.turns],
            "model": self.model,
            "temperature": self.temperature,
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class ChatResponse:
    text: str = ""
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0


def build_request(state, agent, config=None) -> ChatRequest:
    """Request for ``agent``: its profile as system text plus the whole transcript."""
    if agent.name not in {r.name for r in state.roles}:
        raise ValueError(f"{agent.name} is not part of this session")
    cfg = config or state.config
    system = agent.profile
    if agent.kind is AgentKind.EXPERT and cfg.verdict_footer:
        system += VERDICT_SUFFIX
    turns = tuple(Turn(m.sender, m.content, m.sender == agent.name) for m in state.transcript.messages)
    return ChatRequest(
        model=cfg.model,
        system=system,
        turns=turns,
        temperature=cfg.temperature,
        max_tokens=cfg.max_tokens,
        agent=agent.name,
        step=state.current_step,
    )


class HTTPBackend:
    """OpenAI-compatible ``/v1/chat/completions`` client with exponential backoff."""

    name = "http"

    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        api_key: Optional[str] = None,
        timeout: float = 120.0,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
        sleep: Callable[[float], None] = time.sleep,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"), headers=headers, timeout=timeout, transport=transport
        )
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self._sleep = sleep

    def complete(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": request.model,
            "messages": request.messages(),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        last = ""
        for attempt in range(self.max_attempts):
            start = time.monotonic()
            try:
                resp = self._client.post("/v1/chat/completions", json=body)
            except httpx.TransportError as exc:
                last = f"transport error: {exc}"
            else:
                if resp.status_code == 429 or resp.status_code >= 500:
                    last = f"HTTP {resp.status_code}"
                elif resp.status_code >= 400:
                    raise BackendError(f"HTTP {resp.status_code}: {resp.text[:500]}")
                else:
                    return self._parse(resp, time.monotonic() - start)
            if attempt + 1 < self.max_attempts:
                delay = self.backoff_base * self.backoff_factor**attempt
                logger.warning("chat completion failed (%s); retrying in %.1fs", last, delay)
                self._sleep(delay)
        raise BackendError(f"giving up after {self.max_attempts} attempts: {last}")

    @staticmethod
    def _parse(resp: httpx.Response, latency: float) -> ChatResponse:
        try:
            data = resp.json()
            text = data["choices"][0]["message"].get("content") or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion payload: {exc}") from exc
        usage = data.get("usage") or {}
        return ChatResponse(
            text,
            int(usage.get("prompt_tokens", 0)),
            int(usage.get("completion_tokens", 0)),
            latency,
        )


class ScriptedBackend:
    """Pops canned responses per agent.

    ``queues`` maps an agent name, or a ``(step, agent name)`` pair for
    step-specific scripts, to a list of response texts. Step-specific queues
    are consulted first.
    """

    name = "scripted"

    def __init__(self, queues: dict):
        self._queues = {k: list(v) for k, v in queues.items()}

    def complete(self, request: ChatRequest) -> ChatResponse:
        for key in ((request.step, request.agent), request.agent):
            queue = self._queues.get(key)
            if queue:
                return ChatResponse(queue.pop(0))
        raise BackendError(f"script exhausted for {request.agent} at step {request.step}")


def _png_writer(name: str) -> str:
    return (
        "import struct, zlib\n"
        "def chunk(tag, data):\n"
        "    return struct.pack('>I', len(data)) + tag + data + struct.pack('>I', zlib.crc32(tag + data) & 0xffffffff)\n"
        "png = b'\\x89PNG\\r\\n\\x1a\\n' + chunk(b'IHDR', struct.pack('>IIBBBBB', 1, 1, 8, 0, 0, 0, 0))"
        " + chunk(b'IDAT', zlib.compress(b'\\x00\\x80')) + chunk(b'IEND', b'')\n"
        f"with open({name!r}, 'wb') as fh:\n"
        "    fh.write(png)\n"
        f"print('saved {name}')\n"
    )


def correct_code(step: int, field_n: Optional[int] = None) -> str:
    """A stand-in solution that produces the step's image (and field file)."""
    body = _png_writer(f"{step}.png")
    if field_n is not None:
        from .queries import field_file_name

        body += (
            "from femagents.fem import solve_step, write_field\n"
            f"u, sxy = solve_step({step}, n={field_n})\n"
            f"write_field(sxy if sxy is not None else u, {field_file_name(step)!r})\n"
        )
    return f"```python\n{body}```"


FAILING_CODE = (
    "```python\n"
    "from math import pi\n"
    "# Create mesh with a hole\n"
    "domain = Circle(Point(0.5, 0.5), 0.2)\n"
    "```"
)
ABAQUS_CODE = "```python\nfrom abaqus import *\nfrom abaqusConstants import *\n```"


class StochasticScript:
    """Seeded stand-in for an LLM group.

    Each query step is decided up front to succeed with probability
    ``p_success``; the Engineer then writes working code for good steps and
    code that raises NameError for bad ones. A Planner picks FEniCS with
    probability ``p_fenics``, otherwise Abaqus, whose code never runs here.
    Experts approve good steps and ask for revisions on bad ones.
    """

    name = "scripted"

    def __init__(self, seed: int, p_success: float = 0.8, p_fenics: float = 0.5, field_n: Optional[int] = None):
        rng = random.Random(seed)
        self.step_ok = {s: rng.random() < p_success for s in (1, 2, 3, 4)}
        self.software = "fenics" if rng.random() < p_fenics else "abaqus"
        self.field_n = field_n

    def complete(self, request: ChatRequest) -> ChatResponse:
        planned = any(t.speaker == "Planner" for t in request.turns)
        abaqus = planned and self.software == "abaqus"
        good = self.step_ok.get(request.step, False) and not abaqus
        role = request.agent
        if role == "Planner":
            if self.software == "fenics":
                text = "I will use FEniCS for the Python code. Please generate the code in FEniCS format."
            else:
                text = "I will use the Finite Element Analysis software Abaqus. Please provide an Abaqus Python script."
        elif role == "Engineer":
            if abaqus:
                text = "Here is the Abaqus Python script.\n" + ABAQUS_CODE
            elif good:
                text = "Here is the full code.\n" + correct_code(request.step, self.field_n)
            else:
                text = "Here is the full code.\n" + FAILING_CODE
        elif good:
            text = "The code looks good now.\n[[VERDICT: approve]]"
        else:
            text = "The hole geometry is not defined; please fix the mesh construction.\n[[VERDICT: revise]]"
        return ChatResponse(text)


@dataclass
class _Stored:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0


class RecordingBackend:
    """Wraps a backend and stores every response under its request fingerprint."""

    name = "record"

    def __init__(self, inner, store_dir):
        self.inner = inner
        self.store = Path(store_dir)
        self.store.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        resp = self.inner.complete(request)
        path = self.store / f"{request.fingerprint()}.json"
        with self._lock:
            entries = json.loads(path.read_text()) if path.exists() else []
            entries.append(_Stored(resp.text, resp.prompt_tokens, resp.completion_tokens, resp.latency).__dict__)
            path.write_text(json.dumps(entries, ensure_ascii=False, indent=1))
        return resp


class ReplayBackend:
    """Serves responses recorded by RecordingBackend; unknown requests raise ReplayMismatch.

    A fingerprint seen several times during recording is answered in the same
    order on replay; extra repeats get the last recorded answer.
    """

    name = "replay"

    def __init__(self, store_dir):
        self.store = Path(store_dir)
        if not self.store.is_dir():
            raise BackendError(f"replay store {self.store} does not exist")
        self._seen: dict[str, int] = {}
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        fp = request.fingerprint()
        path = self.store / f"{fp}.json"
        if not path.exists():
            raise ReplayMismatch(f"no recorded response for request {fp[:16]} ({request.agent}, step {request.step})")
        entries = json.loads(path.read_text())
        with self._lock:
            k = self._seen.get(fp, 0)
            self._seen[fp] = k + 1
        e = entries[min(k, len(entries) - 1)]
        return ChatResponse(e["text"], e["prompt_tokens"], e["completion_tokens"], e["latency"])
