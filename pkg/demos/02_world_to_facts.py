"""From a scenario document to the reasoner's ground fact base.

Run: python demos/02_world_to_facts.py
"""

from collections import Counter

from uatmsim.detour import covered_agents, uncovered_heading_agents
from uatmsim.world import fig1_scenario, to_facts

scenario = fig1_scenario()
world = scenario.world

print(f"network: {len(world.vertiports)} vertiports, "
      f"{len(world.corridors)} corridors, {len(world.uatms)} units, "
      f"{len(scenario.located_agents())} agents in flight")

facts = to_facts(scenario)
histogram = Counter(a.pred for a in facts)
print("fact base:", ", ".join(f"{p}/{n}" for p, n in sorted(histogram.items())))

for unit in sorted(world.uatms):
    print(f"unit {unit} covers agents: {sorted(covered_agents(scenario, unit))}")

unreachable = uncovered_heading_agents(scenario, 1, closed=(2, 3), target=3, staging=(1, 2))
print(f"heading through (2,3) to vertiport 3 but outside unit 1's reach: "
      f"{sorted(unreachable)}")
