"""Waypoint-level movement, congestion alerts, and mid-flight reasoning.

Run: python demos/04_simulation.py
"""

from uatmsim import sim
from uatmsim.detour import covered_agents
from uatmsim.world import fig1_scenario

state = sim.initial_state(fig1_scenario())
count, fraction = sim.occupancy(state, (1, 2))
print(f"step 1: corridor (1,2) holds {count} agents ({fraction:.0%} of waypoints)")
for alert in sim.detect_congestion(state, threshold=0.25):
    print("alert:", alert.to_json_line())

state = sim.apply_route(state, 6, ((1, 2), (2, 7), (7, 3)), at_step=2)
print("\nagent 6 rerouted at step 2; stepping with speed 4 ...")
state = sim.advance_step(state, speed=4)
for ast in state.agent_states:
    print(f"  agent {ast.agent}: corridor {ast.corridor} waypoint {ast.waypoint}")

snapshot = sim.snapshot_scenario(state)
print("\ncoverage after the step (reasoner over regenerated facts):")
for unit in sorted(snapshot.world.uatms):
    print(f"  unit {unit}: {sorted(covered_agents(snapshot, unit))}")
