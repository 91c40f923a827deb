"""The manager-request protocol: locate, deliver, relay, acknowledge, report.

Run: python demos/05_relay_protocol.py
"""

from uatmsim.net import UatmNetwork
from uatmsim.world import fig1_scenario

scenario = fig1_scenario()

net = UatmNetwork(scenario)
instance_id = net.submit_manager_request(3, (2, 3), ((1, 2), (2, 7), (7, 3)))
instance = net.run_until_complete(instance_id)
print("phase:", instance.phase)
print("report:", instance.report)
print(f"\n{len(net.trace)} envelopes:")
for line in net.trace_lines():
    print(" ", line)

print("\n-- same request, but the relay delivery to agent 3 is dropped --")
net = UatmNetwork(
    scenario,
    faults=({"drop_match": {"kind": "RouteUpdate", "to": "agent:3", "from": "uatm:2"}},),
)
instance_id = net.submit_manager_request(3, (2, 3), ((1, 2), (2, 7), (7, 3)))
instance = net.run_until_complete(instance_id)
print("phase:", instance.phase)
print("report:", instance.report)
