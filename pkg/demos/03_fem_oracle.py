"""Reference solutions for the four query steps, and a convergence check."""

import tempfile
from pathlib import Path

import numpy as np

from femagents.fem import compare_fields, hole_mask, read_field, solve_step, write_field

for step in (1, 2, 3, 4):
    u, sxy = solve_step(step, n=50)
    mag = np.hypot(*u.values.T)
    line = f"step {step}: {len(u.points)} nodes, max |u| = {mag.max():.4f} m"
    if sxy is not None:
        line += f", sigma_xy in [{sxy.values.min():.3e}, {sxy.values.max():.3e}] Pa"
    print(line)

# Center node of the stretched square sits at (0.05, 0) by symmetry.
u, _ = solve_step(1, n=50)
i = np.argmin(((u.points - 0.5) ** 2).sum(axis=1))
print("center node:", u.values[i])

# Linear elements: halving h should cut the error by about 4.
ref, _ = solve_step(1, n=160)
errs = {n: compare_fields(solve_step(1, n)[0], ref) for n in (10, 20, 40)}
for n, e in errs.items():
    print(f"n={n:3d}  relative L2 error {e:.3e}")
print("ratio 10/20:", errs[10] / errs[20])

# Field files are what generated code writes for the strictest grading level.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "u3.txt"
    u3, _ = solve_step(3, n=30)
    write_field(u3, path)
    coarse = read_field(path)
    print("step 3, n=30 vs n=50:", compare_fields(coarse, solve_step(3, 50)[0], exclude=hole_mask()))
