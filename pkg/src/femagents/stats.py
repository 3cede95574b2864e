"""Success rates with Wilson score intervals, grouped by combination and scenario."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

SCENARIOS = {1: "Displacement", 2: "ShearDisplacement", 3: "Hole", 4: "Stress"}
COMPLEX = "Complex"
SCENARIO_ORDER = (*SCENARIOS.values(), COMPLEX)


@dataclass(frozen=True)
class RateSummary:
    combination: str
    scenario: str
    n: int
    successes: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    software_filter: str = ""

    @property
    def empty(self) -> bool:
        return self.n == 0


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}]")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    lo, hi = center - half, center + half
    # rounding can push the bounds past the point estimate at 0 or n successes
    return max(0.0, min(lo, p)), min(1.0, max(hi, p))


def rate_summary(
    successes: int, n: int, z: float = 1.96, combination: str = "", scenario: str = "", software_filter: str = ""
) -> RateSummary:
    lo, hi = wilson_interval(successes, n, z)
    return RateSummary(combination, scenario, n, successes, successes / n, lo, hi, software_filter)


def _empty(combination, scenario, software_filter) -> RateSummary:
    nan = float("nan")
    return RateSummary(combination, scenario, 0, 0, nan, nan, nan, software_filter)


def aggregate(
    records: Iterable,
    scenario_mapping: Optional[dict[int, str]] = None,
    software_filter: Optional[str] = None,
    include_complex: bool = True,
    z: float = 1.96,
    combinations: Optional[list[str]] = None,
) -> list[RateSummary]:
    """One summary per combination and scenario, in first-seen combination order.

    ``software_filter`` keeps only trials whose Planner chose that software.
    Groups left empty by the filter come back with ``n == 0``.
    """
    mapping = scenario_mapping or SCENARIOS
    records = list(records)
    order = list(combinations or [])
    for r in records:
        if r.combination not in order:
            order.append(r.combination)
    tag = software_filter or ""
    out = []
    for combo in order:
        group = [r for r in records if r.combination == combo]
        if software_filter:
            group = [r for r in group if r.planner_software == software_filter]
        scen = [(name, lambda r, s=step: r.step_success(s)) for step, name in sorted(mapping.items())]
        if include_complex:
            scen.append((COMPLEX, lambda r: r.step_success(3) and r.step_success(4)))
        for name, ok in scen:
            if not group:
                out.append(_empty(combo, name, tag))
                continue
            k = sum(1 for r in group if ok(r))
            out.append(rate_summary(k, len(group), z, combo, name, tag))
    return out
