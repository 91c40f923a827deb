"""Command-line entry points.

Subcommands::

    solve FILE...                 evaluate rule programs, print the answer set
    covered                       agents a unit covers directly
    uncovered                     unreachable agents heading through a closure
    detour                        run a full detour order, print the outcome
    run                           step the simulation, write the event trace
    serve                         HTTP gateway (see uatmsim.http_api)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .detour import (
    DetourError,
    DetourOrder,
    covered_agents,
    run_detour,
    uncovered_heading_agents,
)
from .gateway import Gateway
from .reasoner import ReasonerError, merge_programs, parse_program, solve_program
from .world import InvariantError, ScenarioError, load_scenario


def _parse_edge(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected FROM,TO but got {text!r}")
    return (int(parts[0]), int(parts[1]))


def _parse_via(text: str) -> list[int]:
    try:
        vertices = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected V1,V2,... but got {text!r}")
    if len(vertices) < 2:
        raise argparse.ArgumentTypeError("a route needs at least two vertiports")
    return vertices


def _scenario(path: str):
    return load_scenario(Path(path))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uatmsim",
        description="Vertiport-corridor traffic management: rule-based "
        "detouring, discrete simulation, and the UATM relay protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="evaluate rule programs")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--show-all", action="store_true", help="ignore #show filters")
    p.add_argument("--json", action="store_true")
    p.add_argument("--capacity", type=int, default=None, help="max ground atoms")

    p = sub.add_parser("covered", help="agents a unit covers directly")
    p.add_argument("--scenario", required=True)
    p.add_argument("--uatm", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("uncovered", help="unreachable agents heading through a closure")
    p.add_argument("--scenario", required=True)
    p.add_argument("--uatm", type=int, required=True)
    p.add_argument("--closed", type=_parse_edge, required=True, metavar="FROM,TO")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--staging", type=_parse_edge, default=None, metavar="FROM,TO")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("detour", help="run a detour order end to end")
    p.add_argument("--scenario", required=True)
    p.add_argument("--closed", type=_parse_edge, required=True, metavar="FROM,TO")
    p.add_argument("--via", type=_parse_via, required=True, metavar="V1,V2,...")
    p.add_argument("--at-step", type=int, default=2)
    p.add_argument("--covered-only", action="store_true",
                   help="skip the relay rule: only directly covered agents")
    p.add_argument("--json", action="store_true")
    p.add_argument("--journal", default=None, metavar="FILE",
                   help="also issue the closure as a gateway command and "
                   "write the session journal to FILE")

    p = sub.add_parser("run", help="step the simulation and write the trace")
    p.add_argument("--scenario", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--speed", type=int, default=1)
    p.add_argument("--congestion-threshold", type=float, default=0.8)
    p.add_argument("--trace", required=True, metavar="FILE")

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--scenario", default=None, help="preload one session")
    p.add_argument("--console", default=None, metavar="DIR",
                   help="serve a built web console from DIR at /console")

    return parser


def cmd_solve(args) -> int:
    programs = [parse_program(Path(f).read_text()) for f in args.files]
    model = solve_program(merge_programs(*programs), args.capacity)
    if args.json:
        print(model.to_json(show_all=args.show_all))
    else:
        sys.stdout.write(model.render_text(show_all=args.show_all))
    return 0


def cmd_covered(args) -> int:
    agents = sorted(covered_agents(_scenario(args.scenario), args.uatm))
    if args.json:
        print(json.dumps({"uatm": args.uatm, "agents": agents}))
    else:
        print(" ".join(str(a) for a in agents))
    return 0


def cmd_uncovered(args) -> int:
    agents = sorted(
        uncovered_heading_agents(
            _scenario(args.scenario),
            args.uatm,
            closed=args.closed,
            target=args.target,
            staging=args.staging,
        )
    )
    if args.json:
        print(json.dumps({"uatm": args.uatm, "agents": agents}))
    else:
        print(" ".join(str(a) for a in agents))
    return 0


def cmd_detour(args) -> int:
    scenario = _scenario(args.scenario)
    via = args.via
    route = tuple((via[i], via[i + 1]) for i in range(len(via) - 1))
    target = via[-1]
    issuing = scenario.world.responsible_uatm(target)
    if issuing is None:
        raise DetourError(f"no uatm is responsible for vertiport {target}")
    order = DetourOrder(
        closed=args.closed,
        alt_route=route,
        activation_step=args.at_step,
        requesting_vertiport=target,
        issuing_uatm=issuing,
    )
    outcome = run_detour(scenario, order, include_uncovered=not args.covered_only)
    if args.json:
        print(
            json.dumps(
                {
                    "status": outcome.status,
                    "covered": sorted(outcome.covered),
                    "uncovered": sorted(outcome.uncovered),
                    "requests": sorted(list(r) for r in outcome.requests),
                    "changes": sorted(list(c) for c in outcome.changes),
                    "violated": list(outcome.violated),
                },
                sort_keys=True,
            )
        )
    else:
        print(f"status: {outcome.status}")
        print("covered: " + " ".join(str(a) for a in sorted(outcome.covered)))
        print("uncovered: " + " ".join(str(a) for a in sorted(outcome.uncovered)))
        print("requests: " + " ".join(f"{a}@{t}" for a, t in sorted(outcome.requests)))
        print("changes: " + " ".join(f"{a}@{t}" for a, t in sorted(outcome.changes)))
        for violation in outcome.violated:
            print(f"violated: {violation}")
    if args.journal:
        gateway = Gateway()
        session = gateway.create_session(scenario)
        gateway.command(
            session.session_id,
            {
                "action": "close_corridor",
                "from": args.closed[0],
                "to": args.closed[1],
                "via": via,
                "at_step": args.at_step,
            },
        )
        Path(args.journal).write_text("\n".join(session.journal) + "\n")
    return 0


def cmd_run(args) -> int:
    gateway = Gateway()
    session = gateway.create_session(
        _scenario(args.scenario),
        speed=args.speed,
        congestion_threshold=args.congestion_threshold,
    )
    for _ in range(args.steps):
        gateway.command(session.session_id, {"action": "step"})
    Path(args.trace).write_text(session.export_trace())
    print(
        f"stepped to {session.state.step}; "
        f"in flight {len(session.state.agent_states)}, "
        f"arrived {len(session.state.arrived)}; "
        f"{len(session.events)} events -> {args.trace}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .http_api import create_app

    gateway = Gateway()
    if args.scenario:
        session = gateway.create_session(_scenario(args.scenario))
        print(f"preloaded session {session.session_id} from {args.scenario}")
    app = create_app(gateway, console_dir=args.console)
    if args.console:
        print(f"console at http://{args.host}:{args.port}/console/")
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "solve": cmd_solve,
        "covered": cmd_covered,
        "uncovered": cmd_uncovered,
        "detour": cmd_detour,
        "run": cmd_run,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except (ReasonerError, ScenarioError, InvariantError, DetourError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
