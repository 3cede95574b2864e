"""Role-based LLM agent group chats that write finite-element code, plus the tools to grade them."""

from .chat import ChatConfig, SessionState, StepDone, Verdict, detect_verdict, next_speaker, run_session, run_step
from .roles import AgentKind, AgentRole, builtin_roles, lookup_role
from .transcript import ChatMessage, Transcript, transcript_hash

__version__ = "0.1.0"

__all__ = [
    "ChatConfig", "SessionState", "StepDone", "Verdict", "detect_verdict", "next_speaker", "run_session",
    "run_step", "AgentKind", "AgentRole", "builtin_roles", "lookup_role", "ChatMessage", "Transcript",
    "transcript_hash",
]
