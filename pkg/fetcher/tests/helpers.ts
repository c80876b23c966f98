import * as fs from "fs";
import * as path from "path";

import { Transport } from "../src/types";

const FIXTURES: Record<string, string> = {
  AAA: "aaa_chart.json",
  BBB: "bbb_chart.json",
  CCC: "ccc_chart.json",
  NOPE: "bad_chart.json",
};

export function fixtureBody(name: string): string {
  return fs.readFileSync(path.join(__dirname, "fixtures", name), "utf8");
}

export function symbolOf(url: string): string {
  return decodeURIComponent(new URL(url).pathname.split("/").pop()!);
}

export interface CannedTransport extends Transport {
  calls: string[];
}

/** Transport answering from the canned fixtures; unknown symbols get HTTP 404. */
export function cannedTransport(
  overrides: Record<string, (attempt: number) => { status: number; body: string }> = {},
): CannedTransport {
  const calls: string[] = [];
  const perSymbolAttempts = new Map<string, number>();
  const transport = (async (url: string) => {
    const symbol = symbolOf(url);
    calls.push(symbol);
    const attempt = perSymbolAttempts.get(symbol) ?? 0;
    perSymbolAttempts.set(symbol, attempt + 1);
    if (symbol in overrides) {
      return overrides[symbol](attempt);
    }
    const fixture = FIXTURES[symbol];
    if (!fixture) {
      return { status: 404, body: "not found" };
    }
    return { status: 200, body: fixtureBody(fixture) };
  }) as CannedTransport;
  transport.calls = calls;
  return transport;
}
