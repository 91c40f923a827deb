"""The four bundled rule queries, end to end through the reasoner.

Run: python demos/01_answer_sets.py
"""

from importlib import resources

from uatmsim.reasoner import merge_programs, parse_program, solve_program


def load(name: str):
    return parse_program((resources.files("uatmsim") / "data" / name).read_text())


base = load("fig1_base.lp")

for name, blurb in [
    ("query_covered.lp", "agents unit 1 can reach directly"),
    ("detour_covered.lp", "reroute the directly covered agents"),
    ("query_uncovered.lp", "agents unit 1 cannot reach"),
    ("detour_all.lp", "reroute everyone, relaying where needed"),
]:
    model = solve_program(merge_programs(base, load(name)))
    print(f"== {name}: {blurb}")
    print(" ".join(str(a) for a in model.shown_atoms()))
    print(model.status.upper())
    print()
