"""A scripted group chat for one query step.

The Engineer writes code, the Executor runs it, and the Expert reviews the
result. The speaker order comes from a fixed rule table, so the same inputs
always give the same conversation.
"""

import sys
import tempfile

from femagents import SessionState, next_speaker, run_step
from femagents.backends import ScriptedBackend, correct_code
from femagents.queries import query_steps
from femagents.roles import resolve_combination
from femagents.sandbox import Sandbox

roles = resolve_combination("Eng+Exe+Exp1")
for r in roles:
    print(f"{r.abbreviation:>5}  {r.profile[:70]}...")

# Canned replies stand in for the LLM. The first attempt forgets an import.
backend = ScriptedBackend({
    "Engineer": ["```python\nprint(sqrt(2))\n```", "Fixed the import.\n" + correct_code(1)],
    "Expert1": ["The code looks good now.\n[[VERDICT: approve]]"],
})

with tempfile.TemporaryDirectory() as ws:
    state = SessionState(roles)
    trace = run_step(state, query_steps()[0], backend, Sandbox(ws, interpreter_cmd=sys.executable))

for m in trace.messages:
    print(f"\n--- [{m.index}] {m.sender} ({m.kind})")
    print(m.content[:300])

print(f"\nstep ended with {trace.termination} after {trace.executor_attempts} executions")
print("who would speak next:", next_speaker(state))
