import json

import httpx
import pytest

from femagents.backends import (
    API_KEY_ENV,
    VERDICT_SUFFIX,
    BackendError,
    ChatRequest,
    HTTPBackend,
    RecordingBackend,
    ReplayBackend,
    ReplayMismatch,
    ScriptedBackend,
    StochasticScript,
    Turn,
    build_request,
)
from femagents.chat import ChatConfig, SessionState, run_session
from femagents.queries import query_steps
from femagents.roles import lookup_role, resolve_combination
from femagents.sandbox import ExecutionResult, ScriptedSandbox
from femagents.transcript import Transcript, transcript_hash

EMPTY_HASH = "9a1eb41dc11eb07a5b45503b0f84bf794ed4434e19e4443ea52f210e15d65330"


def _state(combo="Eng+Exe+Exp1"):
    return SessionState(resolve_combination(combo))


def test_request_for_empty_transcript():
    s = _state()
    req = build_request(s, lookup_role("Eng"))
    assert req.system == lookup_role("Eng").profile
    assert req.turns == ()
    assert req.model == "gpt-3.5-turbo" and req.temperature == 1.0


def test_request_preserves_order_and_marks_own_turns():
    s = _state()
    s.begin_step(1, "Solve it.")
    s.record("Engineer", "code A")
    s.record("Expert1", "review")
    req = build_request(s, lookup_role("Eng"))
    assert [(t.speaker, t.text, t.own) for t in req.turns] == [
        ("User", "Solve it.", False), ("Engineer", "code A", True), ("Expert1", "review", False)
    ]
    assert req.messages()[1:] == [
        {"role": "user", "content": "User: Solve it."},
        {"role": "assistant", "content": "code A"},
        {"role": "user", "content": "Expert1: review"},
    ]


def test_expert_system_gets_suffix_only_with_footer_protocol():
    s = _state()
    exp = lookup_role("Exp1")
    assert build_request(s, exp).system == exp.profile + VERDICT_SUFFIX
    assert build_request(s, exp, ChatConfig(verdict_footer=False)).system == exp.profile
    assert build_request(s, lookup_role("Eng")).system == lookup_role("Eng").profile


def test_request_rejects_foreign_agent():
    with pytest.raises(ValueError):
        build_request(_state(), lookup_role("Plan"))


def test_fingerprint_ignores_routing_hints():
    a = ChatRequest("m", "sys", (Turn("User", "hi"),), agent="Engineer", step=1)
    b = ChatRequest("m", "sys", (Turn("User", "hi"),), agent="Expert1", step=3)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != ChatRequest("m", "sys", (Turn("User", "hi!"),)).fingerprint()
    assert a.fingerprint() != ChatRequest("m", "sys", (Turn("User", "hi"),), temperature=0.5).fingerprint()


def _completion(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": 11, "completion_tokens": 3}}


def test_http_backend_posts_openai_body(monkeypatch):
    seen = []

    def handler(request):
        seen.append(request)
        return httpx.Response(200, json=_completion("hello"))

    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    be = HTTPBackend("http://llm.local/", transport=httpx.MockTransport(handler))
    resp = be.complete(ChatRequest("gpt-3.5-turbo", "sys", (Turn("User", "hi"),), temperature=0.7))
    assert resp.text == "hello" and resp.prompt_tokens == 11 and resp.completion_tokens == 3
    req = seen[0]
    assert req.url == "http://llm.local/v1/chat/completions"
    assert req.headers["authorization"] == "Bearer sk-test"
    body = json.loads(req.content)
    assert body["model"] == "gpt-3.5-turbo" and body["temperature"] == 0.7
    assert body["messages"] == [{"role": "system", "content": "sys"}, {"role": "user", "content": "User: hi"}]


def test_http_backend_retries_with_exponential_backoff():
    codes = iter([429, 500, 503, 200])
    sleeps = []

    def handler(request):
        code = next(codes)
        return httpx.Response(code, json=_completion("ok") if code == 200 else {})

    be = HTTPBackend("http://x", api_key="", sleep=sleeps.append, transport=httpx.MockTransport(handler))
    assert be.complete(ChatRequest("m", "s")).text == "ok"
    assert sleeps == [1.0, 2.0, 4.0]


def test_http_backend_gives_up_after_five_attempts():
    calls = []
    sleeps = []

    def handler(request):
        calls.append(1)
        return httpx.Response(502)

    be = HTTPBackend("http://x", api_key="", sleep=sleeps.append, transport=httpx.MockTransport(handler))
    with pytest.raises(BackendError):
        be.complete(ChatRequest("m", "s"))
    assert len(calls) == 5 and sleeps == [1.0, 2.0, 4.0, 8.0]


def test_http_client_error_is_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="bad key")

    be = HTTPBackend("http://x", api_key="", sleep=lambda s: None, transport=httpx.MockTransport(handler))
    with pytest.raises(BackendError):
        be.complete(ChatRequest("m", "s"))
    assert len(calls) == 1


def test_scripted_queue():
    be = ScriptedBackend({"Engineer": ["hello"]})
    req = ChatRequest("m", "s", agent="Engineer")
    assert be.complete(req).text == "hello"
    with pytest.raises(BackendError):
        be.complete(req)


def test_scripted_step_queue_takes_precedence():
    be = ScriptedBackend({"Engineer": ["any"], (2, "Engineer"): ["two"]})
    assert be.complete(ChatRequest("m", "s", agent="Engineer", step=2)).text == "two"
    assert be.complete(ChatRequest("m", "s", agent="Engineer", step=2)).text == "any"


def _run(backend, combo="Plan+Eng+Exe+Exp", seed=3):
    state = SessionState(resolve_combination(combo))
    script = StochasticScript(seed, p_success=0.5)
    ok, bad = ExecutionResult(0, "saved\n"), ExecutionResult(1, "NameError: name 'Circle' is not defined")
    results = {k: [ok if script.step_ok[k] else bad] * 40 for k in (1, 2, 3, 4)}
    run_session(state, query_steps(), backend, ScriptedSandbox(results))
    return state.transcript


def test_same_seed_same_transcript_hash():
    assert transcript_hash(_run(StochasticScript(3, 0.5))) == transcript_hash(_run(StochasticScript(3, 0.5)))


def test_record_then_replay_round_trip(tmp_path):
    recorded = _run(RecordingBackend(StochasticScript(3, 0.5), tmp_path / "store"))
    replayed = _run(ReplayBackend(tmp_path / "store"))
    assert replayed.same_messages(recorded)
    assert any(tmp_path.joinpath("store").glob("*.json"))


def test_replay_returns_recorded_usage(tmp_path):
    inner = ScriptedBackend({"Engineer": ["a"]})
    inner.complete = lambda req, _c=inner.complete: _usage(_c(req))
    rec = RecordingBackend(inner, tmp_path)
    req = ChatRequest("m", "s", (Turn("User", "q"),), agent="Engineer")
    first = rec.complete(req)
    again = ReplayBackend(tmp_path).complete(req)
    assert (again.text, again.prompt_tokens, again.completion_tokens) == (first.text, 5, 7)


def _usage(resp):
    resp.prompt_tokens, resp.completion_tokens = 5, 7
    return resp


def test_replay_mismatch(tmp_path):
    rec = RecordingBackend(ScriptedBackend({"Engineer": ["a"]}), tmp_path)
    rec.complete(ChatRequest("m", "s", (Turn("User", "q"),), agent="Engineer"))
    with pytest.raises(ReplayMismatch):
        ReplayBackend(tmp_path).complete(ChatRequest("m", "s", (Turn("User", "q?"),), agent="Engineer"))


def test_replay_mismatch_ends_step_cleanly(tmp_path):
    _run(RecordingBackend(StochasticScript(3, 0.5), tmp_path))
    state = SessionState(resolve_combination("Plan+Eng+Exe+Exp"))
    traces = run_session(state, ["a different prompt"], ReplayBackend(tmp_path), ScriptedSandbox([]))
    assert traces[0].termination == "replay_mismatch"


def test_transcript_hash_pins():
    assert transcript_hash(Transcript()) == EMPTY_HASH
    a, b = Transcript(), Transcript()
    a.append("User", "abc", 1, "prompt")
    b.append("User", "abd", 1, "prompt")
    assert transcript_hash(a) != transcript_hash(b)
    a.metadata["wall_time"] = 12.5
    c = Transcript()
    c.append("User", "abc", 1, "prompt")
    assert transcript_hash(a) == transcript_hash(c)
