"""Code extraction and execution, with Executor-style feedback."""

import sys
import tempfile

from femagents.sandbox import ExecLimits, execute_blocks, extract_code_blocks, format_feedback

message = """Here is the code.

```python
from math import pi
print("area", pi * 0.2 ** 2)
domain = Circle(Point(0.5, 0.5), 0.2)
```
"""

blocks = extract_code_blocks(message)
print(f"{len(blocks)} block(s), tag={blocks[0].language_tag!r}")

with tempfile.TemporaryDirectory() as ws:
    result = execute_blocks(blocks, ws, ExecLimits(wall_timeout=10), sys.executable)
    print(format_feedback(result))

    # a block that writes a file shows up in produced_files
    blocks = extract_code_blocks("```python\nopen('1.png', 'wb').write(b'not really a png')\n```")
    result = execute_blocks(blocks, ws, interpreter_cmd=sys.executable, step=1, version=2)
    print("produced:", result.produced_files)

    # long output is cut for the chat
    blocks = extract_code_blocks("```python\nprint('x' * 5000)\n```")
    print(format_feedback(execute_blocks(blocks, ws, interpreter_cmd=sys.executable), output_cap=80))
