/**
 * Job orchestration: validate, download every ticker (concurrently, with
 * retry/backoff), assemble the panel, and write CSV + manifest.
 *
 * Per-ticker failures never abort the job — they are recorded in the
 * manifest — but a job where every ticker fails raises
 * AllTickersFailedError so callers can exit non-zero.
 */

import * as fs from "fs";
import * as path from "path";

import { assemblePanel, manifestPathFor, manifestToJson, panelToCsv } from "./panel";
import {
  AllTickersFailedError,
  ArgumentError,
  FetchFailure,
  FetchJob,
  Manifest,
  TickerSeries,
  Transport,
} from "./types";
import { chartUrl, parseChart } from "./yahoo";

export type Logger = (line: string) => void;

function isIsoDate(text: string): boolean {
  if (!/^\d{4}-\d{2}-\d{2}$/.test(text)) return false;
  const parsed = new Date(`${text}T00:00:00Z`);
  return !Number.isNaN(parsed.getTime()) && parsed.toISOString().slice(0, 10) === text;
}

export function validateJob(job: FetchJob): void {
  if (job.tickers.length === 0) {
    throw new ArgumentError("ticker list is empty");
  }
  const seen = new Set<string>();
  for (const ticker of job.tickers) {
    if (!ticker || /[\s,]/.test(ticker)) {
      throw new ArgumentError(`bad ticker ${JSON.stringify(ticker)}`);
    }
    if (seen.has(ticker)) {
      throw new ArgumentError(`duplicate ticker ${ticker}`);
    }
    seen.add(ticker);
  }
  for (const [name, value] of [["start", job.start], ["end", job.end]] as const) {
    if (!isIsoDate(value)) {
      throw new ArgumentError(`${name} must be a YYYY-MM-DD date, got ${JSON.stringify(value)}`);
    }
  }
  if (job.start >= job.end) {
    throw new ArgumentError(`start must be before end (${job.start} >= ${job.end})`);
  }
  if (!job.out) {
    throw new ArgumentError("output path is empty");
  }
  if (job.retry.maxRetries < 0 || !Number.isInteger(job.retry.maxRetries)) {
    throw new ArgumentError("max retries must be a non-negative integer");
  }
  if (job.retry.backoffSeconds < 0) {
    throw new ArgumentError("backoff seconds must be non-negative");
  }
  if (job.concurrency < 1 || !Number.isInteger(job.concurrency)) {
    throw new ArgumentError("concurrency must be a positive integer");
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Run fn over items with at most `limit` in flight; results keep item order. */
export async function mapLimit<T, R>(
  items: T[],
  limit: number,
  fn: (item: T, index: number) => Promise<R>,
): Promise<R[]> {
  const results = new Array<R>(items.length);
  let next = 0;
  const workers = Array.from({ length: Math.min(limit, items.length) }, async () => {
    while (next < items.length) {
      const i = next++;
      results[i] = await fn(items[i], i);
    }
  });
  await Promise.all(workers);
  return results;
}

/**
 * Download one ticker's rows, retrying retryable failures (network errors,
 * HTTP 429/5xx) with exponential backoff.  Permanent failures (bad symbol,
 * empty range, malformed payload) surface immediately.
 */
export async function fetchTicker(
  ticker: string,
  job: FetchJob,
  transport: Transport,
): Promise<TickerSeries> {
  const url = chartUrl(ticker, job.start, job.end);
  for (let attempt = 0; ; attempt++) {
    let failure: FetchFailure;
    try {
      const response = await transport(url);
      if (response.status === 429 || response.status >= 500) {
        throw new FetchFailure(`HTTP ${response.status}`, true);
      }
      if (response.status !== 200) {
        throw new FetchFailure(`HTTP ${response.status}`, false);
      }
      const rows = parseChart(response.body, {
        adjusted: job.adjusted,
        start: job.start,
        end: job.end,
      });
      if (rows.length === 0) {
        throw new FetchFailure("no trading days in range", false);
      }
      return { ticker, rows };
    } catch (err) {
      // anything the transport itself threw is a network hiccup: retryable
      failure = err instanceof FetchFailure
        ? err
        : new FetchFailure(err instanceof Error ? err.message : String(err), true);
    }
    if (!failure.retryable || attempt >= job.retry.maxRetries) {
      throw failure;
    }
    await sleep(job.retry.backoffSeconds * 1000 * 2 ** attempt);
  }
}

export interface JobResult {
  manifest: Manifest;
  csv: string;
  csvPath: string;
  manifestPath: string;
}

type Settled =
  | { ticker: string; series: TickerSeries }
  | { ticker: string; error: string };

/** Download everything, then write the CSV and its manifest (single writer). */
export async function runFetchJob(
  job: FetchJob,
  transport: Transport,
  log: Logger = () => {},
): Promise<JobResult> {
  validateJob(job);

  const settled = await mapLimit(job.tickers, job.concurrency, async (ticker): Promise<Settled> => {
    try {
      const series = await fetchTicker(ticker, job, transport);
      log(`${ticker}: ${series.rows.length} rows`);
      return { ticker, series };
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      log(`${ticker}: FAILED (${message})`);
      return { ticker, error: message };
    }
  });

  const successes = settled.filter(
    (s): s is { ticker: string; series: TickerSeries } => "series" in s,
  );
  if (successes.length === 0) {
    const details = settled.map((s) => `${s.ticker} (${"error" in s ? s.error : "?"})`);
    throw new AllTickersFailedError(`every ticker failed: ${details.join(", ")}`);
  }

  const panel = assemblePanel(successes.map((s) => s.series));
  const manifest: Manifest = {
    start: job.start,
    end: job.end,
    adjusted: job.adjusted,
    output: job.out,
    rows: panel.dates.length,
    columns: panel.columns,
    tickers: settled.map((s) =>
      "series" in s
        ? { ticker: s.ticker, status: "ok" as const, rows: s.series.rows.length }
        : { ticker: s.ticker, status: "error" as const, rows: 0 as const, error: s.error },
    ),
  };

  const csv = panelToCsv(panel);
  const csvPath = job.out;
  const manifestPath = manifestPathFor(job.out);
  const dir = path.dirname(csvPath);
  if (dir && !fs.existsSync(dir)) {
    fs.mkdirSync(dir, { recursive: true });
  }
  fs.writeFileSync(csvPath, csv);
  fs.writeFileSync(manifestPath, manifestToJson(manifest));
  return { manifest, csv, csvPath, manifestPath };
}
