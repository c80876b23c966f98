/**
 * Yahoo Finance v8 chart API client: URL building, response parsing, and the
 * real HTTP transport.  Parsing is pure so tests can feed canned JSON.
 */

import { FetchFailure, PriceRow, Transport } from "./types";

const CHART_API = "https://query1.finance.yahoo.com/v8/finance/chart/";

const DAY_SECONDS = 24 * 60 * 60;

function unixDay(date: string): number {
  return Math.floor(new Date(`${date}T00:00:00Z`).getTime() / 1000);
}

/** Daily-bars chart URL covering [start, end] inclusive. */
export function chartUrl(ticker: string, start: string, end: string): string {
  const period1 = unixDay(start);
  const period2 = unixDay(end) + DAY_SECONDS; // API treats period2 as exclusive
  const params = [
    `period1=${period1}`,
    `period2=${period2}`,
    "interval=1d",
    "events=history",
    "includeAdjustedClose=true",
  ];
  return `${CHART_API}${encodeURIComponent(ticker)}?${params.join("&")}`;
}

export interface ParseOptions {
  adjusted: boolean;
  start: string;
  end: string;
}

/**
 * Extract daily close rows from a chart API response body.
 *
 * Keeps bars dated inside [start, end]; skips bars whose close is null or
 * non-positive (vendor junk); when a date repeats (a live intraday bar next
 * to the settled one) the last occurrence wins.  Throws FetchFailure when
 * the body is not a usable chart payload.
 */
export function parseChart(body: string, opts: ParseOptions): PriceRow[] {
  let json: any;
  try {
    json = JSON.parse(body);
  } catch {
    throw new FetchFailure("response is not JSON", false);
  }

  const error = json?.chart?.error;
  if (error) {
    throw new FetchFailure(String(error.description ?? error.code ?? "chart error"), false);
  }

  const result = json?.chart?.result?.[0];
  const timestamps: unknown = result?.timestamp;
  const quote = result?.indicators?.quote?.[0];
  if (!result || !Array.isArray(timestamps) || !quote || !Array.isArray(quote.close)) {
    throw new FetchFailure("no quote data in response", false);
  }
  const adjclose: unknown[] | undefined = result?.indicators?.adjclose?.[0]?.adjclose;

  const byDate = new Map<string, number>();
  for (let i = 0; i < timestamps.length; i++) {
    const ts = timestamps[i];
    if (typeof ts !== "number") continue;
    const date = new Date(ts * 1000).toISOString().slice(0, 10);
    if (date < opts.start || date > opts.end) continue;

    const raw = opts.adjusted ? adjclose?.[i] ?? quote.close[i] : quote.close[i];
    const close = typeof raw === "number" ? raw : NaN;
    if (!Number.isFinite(close) || close <= 0) continue;
    byDate.set(date, close);
  }

  return [...byDate.entries()]
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([date, close]) => ({ date, close }));
}

/** Real transport: HTTP GET returning status and body text. */
export const httpTransport: Transport = async (url) => {
  const response = await fetch(url, {
    headers: { "User-Agent": "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36" },
  });
  return { status: response.status, body: await response.text() };
};
