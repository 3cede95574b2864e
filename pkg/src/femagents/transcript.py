"""Conversation records: messages, transcripts, JSONL persistence and hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

PROMPT = "prompt"
AGENT = "agent"
EXECUTOR_FEEDBACK = "executor_feedback"
MESSAGE_KINDS = (PROMPT, AGENT, EXECUTOR_FEEDBACK)

USER = "User"
# metadata keys left out of the canonical form so reruns hash equal
VOLATILE_KEYS = frozenset({"started_at", "finished_at", "timestamps", "wall_time"})

_FIELDS = ("index", "step", "sender", "kind", "content")


@dataclass(frozen=True)
class ChatMessage:
    index: int
    sender: str
    content: str
    step: int
    kind: str = AGENT

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        return {k: d[k] for k in _FIELDS}


@dataclass
class Transcript:
    messages: list[ChatMessage] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def append(self, sender: str, content: str, step: int, kind: str = AGENT) -> ChatMessage:
        if kind not in MESSAGE_KINDS:
            raise ValueError(f"unknown message kind {kind!r}")
        if self.messages and step < self.messages[-1].step:
            raise ValueError("step tags must not decrease")
        msg = ChatMessage(len(self.messages), sender, content, step, kind)
        self.messages.append(msg)
        return msg

    def __len__(self):
        return len(self.messages)

    def step_messages(self, step: int) -> list[ChatMessage]:
        return [m for m in self.messages if m.step == step]

    def canonical(self) -> str:
        meta = {k: v for k, v in self.metadata.items() if k not in VOLATILE_KEYS}
        body = {"messages": [m.to_dict() for m in self.messages], "metadata": meta}
        return json.dumps(body, sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    def same_messages(self, other: "Transcript") -> bool:
        return [m.to_dict() for m in self.messages] == [m.to_dict() for m in other.messages]


def transcript_hash(t: Transcript) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(t.canonical().encode("utf-8")).hexdigest()


def write_transcript(t: Transcript, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m in t.messages:
            fh.write(json.dumps(m.to_dict(), ensure_ascii=False) + "\n")


def read_transcript(path) -> Transcript:
    t = Transcript()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["index"] != len(t.messages):
                raise ValueError(f"{path}:{lineno}: expected index {len(t.messages)}, got {rec['index']}")
            t.append(rec["sender"], rec["content"], rec["step"], rec["kind"])
    return t
