"""The four-step linear-elasticity query, with and without a Planner."""

from __future__ import annotations

Q1 = "q1"
Q2_PLANNER = "q2_planner"

_Q1_STEPS = (
    "A 2D plate occupies 1m-by-1m domain.\n"
    "It is assumed as linear elastic and has Young's modulus of 1GPa and Poisson ration of 0.3.\n"
    "There is a 0.1m displacement applied on the right edge.\n"
    "The left edge is fixed.\n"
    "The top and bottom edges are free to move.\n"
    "Check your formula online if you need to.\n"
    "Define your variables.\n"
    "Solve for the displacement using FEniCS with a mesh of 50x50, and plot the displacement result "
    "in a PNG file named 1.png",
    "Let's change the boundary condition on the right edge to a shear case.\n"
    "The displacement along y direction is 0.1m on the right edge.\n"
    "Define your variables.\n"
    "Please refine the mesh to 50-by-50 elements, solve the problem again and save result into "
    "another png file.",
    "Let's add a circular hole of radius 0.2m in the middle of the original square domain.\n"
    "Define your variables.\n"
    "Please solve the shear problem and plot results.",
    "Let's also calculate the stress component σ_{xy} and save it into another png file.",
)

_Q2_STEP1 = (
    "A 2D plate occupies 1m-by-1m domain.\n"
    "It is assumed as linear elastic and has Young's modulus of 1GPa and Poisson ration of 0.3.\n"
    "There is a 0.1m displacement applied on the right edge.\n"
    "The left edge is fixed.\n"
    "Solve for the displacement by finite element software code with a mesh of 50x50, and plot the "
    "displacement result in a PNG file named 1.png."
)


def field_file_name(step: int) -> str:
    """File the generated code is asked to write when fields are verified."""
    return "sxy4.txt" if step == 4 else f"u{step}.txt"


def field_request(step: int) -> str:
    what = "shear stress sigma_xy (one value per node)" if step == 4 else "displacement (ux uy per node)"
    return (
        f"Also save the nodal {what} to a text file named {field_file_name(step)}: first line "
        "'femagents-field v1', second line '<node_count> <component_count>', then one line "
        "'x y value...' per mesh node."
    )


def query_steps(query: str = Q1, request_fields: bool = False) -> list[str]:
    if query == Q1:
        steps = list(_Q1_STEPS)
    elif query == Q2_PLANNER:
        steps = [_Q2_STEP1, *_Q1_STEPS[1:]]
    else:
        raise ValueError(f"unknown query {query!r}")
    if request_fields:
        steps = [f"{s}\n{field_request(i)}" for i, s in enumerate(steps, start=1)]
    return steps
