import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  buildClosureCommand,
  commandJournalLine,
  phasesFromEvents,
  validateViaRoute,
} from "../src/closure_dialog.js";
import { NetworkDoc, parseEventLine } from "../src/types.js";

const state = JSON.parse(
  readFileSync(new URL("./fixtures/fig1_state.json", import.meta.url), "utf-8"),
);
const network: NetworkDoc = state.network;

const traceLines = readFileSync(
  new URL("./fixtures/fig1_session_trace.jsonl", import.meta.url),
  "utf-8",
)
  .split("\n")
  .filter((l) => l.length > 0)
  .map(parseEventLine);

describe("closure command parity with the CLI journal", () => {
  it("produces the journal line byte-for-byte", () => {
    const journal = readFileSync(
      new URL("./fixtures/fig1_journal.jsonl", import.meta.url),
      "utf-8",
    ).split("\n");
    const command = buildClosureCommand([2, 3], [1, 2, 7, 3], 2);
    expect(commandJournalLine(command)).toBe(journal[0]);
  });
});

describe("via-route validation", () => {
  it("accepts the bundled alternative route", () => {
    expect(validateViaRoute(network, [2, 3], [1, 2, 7, 3])).toEqual([]);
  });

  it("blocks a route through the closed corridor", () => {
    const problems = validateViaRoute(network, [2, 3], [1, 2, 3]);
    expect(problems.some((p) => p.includes("closed corridor"))).toBe(true);
  });

  it("blocks unknown corridors and repeated vertiports", () => {
    expect(
      validateViaRoute(network, [2, 3], [1, 7, 3]).some((p) =>
        p.includes("no corridor"),
      ),
    ).toBe(true);
    expect(
      validateViaRoute(network, [2, 3], [1, 2, 7, 2]).some((p) =>
        p.includes("twice"),
      ),
    ).toBe(true);
    expect(validateViaRoute(network, [2, 3], [1])).toEqual([
      "route needs at least two vertiports",
    ]);
  });

  it("accepts reverse traversal of a declared corridor", () => {
    expect(validateViaRoute(network, [1, 2], [3, 7, 2])).toEqual([]);
  });
});

describe("protocol phase tracking", () => {
  it("walks the full phase sequence on the bundled closure", () => {
    expect(phasesFromEvents(traceLines, 1)).toEqual([
      "Reasoning",
      "Locating",
      "Delivering",
      "AwaitingAcks",
      "Done",
    ]);
  });

  it("ends in Failed on a failed report", () => {
    const unsat = parseEventLine(
      readFileSync(
        new URL("./fixtures/unsat_report_line.json", import.meta.url),
        "utf-8",
      ).trim(),
    );
    expect(phasesFromEvents([unsat], 1)).toEqual(["Failed"]);
  });
});
