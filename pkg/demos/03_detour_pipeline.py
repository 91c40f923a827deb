"""A corridor closure from order to per-step plans, plus the failure story.

Run: python demos/03_detour_pipeline.py
"""

from uatmsim.detour import (
    DetourOrder,
    build_detour_program,
    evaluate_detour_program,
    frame_step_plans,
    run_detour,
)
from uatmsim.reasoner import Program
from uatmsim.world import fig1_scenario

scenario = fig1_scenario()
order = DetourOrder(
    closed=(2, 3),
    alt_route=((1, 2), (2, 7), (7, 3)),
    activation_step=2,
    requesting_vertiport=3,
    issuing_uatm=1,
)

outcome = run_detour(scenario, order)
print("status:", outcome.status)
print("covered:", sorted(outcome.covered), " uncovered:", sorted(outcome.uncovered))
print("requests:", sorted(outcome.requests))
print("changes:", sorted(outcome.changes))

plans = frame_step_plans(scenario, outcome)
for agent in sorted(plans):
    print(f"agent {agent} step 2 plan: {plans[agent][2]}")

print()
print("-- now sabotage the route facts: drop new_plan(2,7,3) --")
program = build_detour_program(scenario, order)
damaged = Program(
    program.rules,
    tuple(
        f for f in program.facts
        if not (f.pred == "new_plan" and tuple(a.value for a in f.args) == (2, 7, 3))
    ),
    program.shows,
)
broken = evaluate_detour_program(damaged, order)
print("status:", broken.status)
for violation in broken.violated[:4]:
    print("violated:", violation)
print(f"... {len(broken.violated)} violated constraints in total")
