"""Built-in agent roles and the experiment combination matrix."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class AgentKind(str, enum.Enum):
    ENGINEER = "Engineer"
    EXECUTOR = "Executor"
    PLANNER = "Planner"
    EXPERT = "Expert"


@dataclass(frozen=True)
class AgentRole:
    name: str
    abbreviation: str
    profile: str
    kind: AgentKind
    generates_code: bool = False

    def __post_init__(self):
        if self.kind is AgentKind.EXECUTOR and self.generates_code:
            raise ValueError("an Executor never writes code")


class RoleNotFound(KeyError):
    pass


ENGINEER_PROFILE = (
    "Engineer. You follow the query to generate codes. You write Python code to solve tasks. "
    "Wrap the code in a code block that specifies the script type. The user can't modify your code. "
    "So do not suggest incomplete code which requires others to modify. Don't use a code block if "
    "it's not intended to be executed by the executor.\n"
    "Don't include multiple code blocks in one response. Do not ask others to copy and paste the result.\n"
    "If the result indicates there is an error, fix the error and output the code again. Suggest the "
    "full code instead of partial code or code changes. If the error can't be fixed or if the task is "
    "not solved even after the code is executed successfully, analyse the problem, revisit your "
    "assumption, collect additional info you need, and think of a different approach to try.\n"
    "Regenerate the code whenever an expert agent makes suggestions."
)
EXECUTOR_PROFILE = "Executor. Save and execute the code written by the engineer and report and save the result."
PLANNER_PROFILE = (
    "Planner, you make a plan based on the query, and clearly state which software you are asking the "
    "Engineer agent to use for the Python code, then ask the engineer to generate the code followed by "
    "the specific software format, Do not generate codes by yourself, do not respond to the message "
    "from Executor, do not give any suggestions for improving the code for Engineer."
)
EXPERT12_PROFILE = (
    "Expert1 & 2, you are an FEniCS expert, you make sure Engineer strictly program based on the given "
    "software format, you discover the potential error and provide suggestions to Engineer. Do not "
    "generate any code."
)
EXXPERT2_PROFILE = (
    "Exxpert2, you always think differently from Expert1, discuss with Expert1 to generate a common "
    "solution based on the query and code. Do not generate any code."
)
PLANNER_EXPERT_PROFILE = (
    "Expert, you are an Expert based on the given software that given by the Planner, you make sure "
    "Engineer strictly program based on the given software framework, you discover the potential error "
    "and provide suggestions to engineer whether the code is successfully running or not, do not "
    "generate code by yourself."
)

# Expert1 and Expert2 share one profile, so seven roles carry six profiles.
_BUILTIN = (
    AgentRole("Engineer", "Eng", ENGINEER_PROFILE, AgentKind.ENGINEER, True),
    AgentRole("Executor", "Exe", EXECUTOR_PROFILE, AgentKind.EXECUTOR, False),
    AgentRole("Planner", "Plan", PLANNER_PROFILE, AgentKind.PLANNER, False),
    AgentRole("Expert1", "Exp1", EXPERT12_PROFILE, AgentKind.EXPERT, False),
    AgentRole("Expert2", "Exp2", EXPERT12_PROFILE, AgentKind.EXPERT, False),
    AgentRole("Exxpert2", "Exxp2", EXXPERT2_PROFILE, AgentKind.EXPERT, False),
    AgentRole("Expert", "Exp", PLANNER_EXPERT_PROFILE, AgentKind.EXPERT, False),
)


def builtin_roles() -> list[AgentRole]:
    return list(_BUILTIN)


def _norm(key: str) -> str:
    return "".join(key.split()).lower()


def lookup_role(key: str, roles=None) -> AgentRole:
    """Find a role by abbreviation or name; whitespace and case are ignored ("Exxp 2")."""
    want = _norm(key)
    for role in roles if roles is not None else _BUILTIN:
        if want in (_norm(role.abbreviation), _norm(role.name)):
            return role
    raise RoleNotFound(key)


# Seating order used when a combination is instantiated.
_SEAT_ORDER = ("Plan", "Eng", "Exe", "Exp", "Exp1", "Exp2", "Exxp2")


def resolve_combination(abbrevs) -> list[AgentRole]:
    if isinstance(abbrevs, str):
        abbrevs = [a for a in abbrevs.replace("+", ",").split(",") if a.strip()]
    roles = [lookup_role(a) for a in abbrevs]
    names = [r.name for r in roles]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate role in combination {abbrevs}")
    if not any(r.kind is AgentKind.ENGINEER for r in roles):
        raise ValueError("a combination needs an Engineer")
    return sorted(roles, key=lambda r: _SEAT_ORDER.index(r.abbreviation))


def combination_label(roles) -> str:
    return "+".join(r.abbreviation for r in resolve_combination([getattr(r, "abbreviation", r) for r in roles]))


# The twelve rows of the study design, in two groups of six. Two rows repeat
# across groups (Eng+Exp1 and Eng+Exe+Exp1); they denote the same runs.
ROLE_IMPACT = (
    ("Eng", "Exp1"),
    ("Eng", "Exe"),
    ("Eng", "Exe", "Exp1"),
    ("Plan", "Eng", "Exe"),
    ("Plan", "Eng", "Exp"),
    ("Plan", "Eng", "Exe", "Exp"),
)
OVERLAP = (
    ("Eng", "Exp1"),
    ("Eng", "Exp1", "Exp2"),
    ("Eng", "Exp1", "Exxp2"),
    ("Eng", "Exe", "Exp1"),
    ("Eng", "Exe", "Exp1", "Exp2"),
    ("Eng", "Exe", "Exp1", "Exxp2"),
)
TABLE_ROWS = ROLE_IMPACT + OVERLAP


def default_combinations() -> list[str]:
    """Distinct combination labels of the study matrix, first-seen order."""
    seen: dict[str, None] = {}
    for row in TABLE_ROWS:
        seen.setdefault("+".join(row), None)
    return list(seen)


# Bar-chart groupings: figure name -> (combination, software filter or None).
FIGURE_GROUPS = {
    "fig2_roles": [("Eng+Exp1", None), ("Eng+Exe", None), ("Eng+Exe+Exp1", None)],
    "fig3_planner": [("Plan+Eng+Exe", None), ("Plan+Eng+Exp", None), ("Plan+Eng+Exe+Exp", None)],
    "fig4_fenics": [
        ("Eng+Exp1", None), ("Eng+Exe", None), ("Eng+Exe+Exp1", None),
        ("Plan+Eng+Exe", "fenics"), ("Plan+Eng+Exp", "fenics"), ("Plan+Eng+Exe+Exp", "fenics"),
    ],
    "fig5_extra_expert": [("Eng+Exp1", None), ("Eng+Exp1+Exp2", None), ("Eng+Exp1+Exxp2", None)],
    "fig6_extra_expert_executor": [
        ("Eng+Exe+Exp1", None), ("Eng+Exe+Exp1+Exp2", None), ("Eng+Exe+Exp1+Exxp2", None),
    ],
}
