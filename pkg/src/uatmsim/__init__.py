"""uatmsim: vertiport-corridor traffic management with rule-based detouring.

A small stack of cooperating layers:

- :mod:`uatmsim.reasoner` — parser, grounder, stratifier, and fixpoint
  evaluator for normal rule programs with negation-as-failure and
  integrity constraints.
- :mod:`uatmsim.world` — the vertiport/corridor/coverage world model,
  scenario documents, and their translation to ground facts.
- :mod:`uatmsim.detour` — corridor-closure queries: coverage, relay
  candidates, detour-order programs, and outcome extraction.
- :mod:`uatmsim.sim` — discrete waypoint-level movement, occupancy, and
  congestion alerts.
- :mod:`uatmsim.net` — the deterministic UATM message bus: locate queries,
  route delivery with relays, acknowledgments, and manager reports.
- :mod:`uatmsim.gateway` / :mod:`uatmsim.http_api` — session lifecycle,
  command journal, event stream, and the HTTP surface.
"""

__version__ = "0.1.0"
