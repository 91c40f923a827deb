"""Sessions, the command journal, and bit-exact replay.

Run: python demos/06_gateway_session.py
"""

from uatmsim.gateway import Gateway
from uatmsim.world import fig1_scenario, scenario_to_dict

gateway = Gateway()
doc = scenario_to_dict(fig1_scenario())
session = gateway.create_session(doc)
print("session:", session.session_id)

gateway.command(
    session.session_id,
    {"action": "close_corridor", "from": 2, "to": 3, "via": [1, 2, 7, 3], "at_step": 2},
)
gateway.command(session.session_id, {"action": "step"})
gateway.command(session.session_id, {"action": "step"})

print("journal:")
for line in session.journal:
    print(" ", line)

replayed = gateway.replay(doc, session.journal)
live = gateway.state_doc(session.session_id, include_id=False)
again = gateway.state_doc(replayed.session_id, include_id=False)
print("replay reproduces state:", live == again)
print("replay reproduces trace:", replayed.export_trace() == session.export_trace())
print("final step:", live["step"], " arrived:", live["arrived"])
