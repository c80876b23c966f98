/** Shared types for the price fetcher. */

export interface RetryPolicy {
  /** Extra attempts after the first one. */
  maxRetries: number;
  /** Base delay before a retry; doubles on each further attempt. */
  backoffSeconds: number;
}

export interface FetchJob {
  /** Tickers to download; CSV column order follows this list. */
  tickers: string[];
  /** First date to keep, YYYY-MM-DD, inclusive. */
  start: string;
  /** Last date to keep, YYYY-MM-DD, inclusive. */
  end: string;
  /** Output CSV path; the manifest lands next to it. */
  out: string;
  /** Write split/dividend-adjusted closes instead of raw closes. */
  adjusted: boolean;
  retry: RetryPolicy;
  /** Max tickers downloaded at once. */
  concurrency: number;
}

export interface PriceRow {
  /** ISO-8601 trading date. */
  date: string;
  close: number;
}

export interface TickerSeries {
  ticker: string;
  rows: PriceRow[];
}

export type FetchOutcome =
  | { ticker: string; status: "ok"; rows: number }
  | { ticker: string; status: "error"; rows: 0; error: string };

export interface Manifest {
  start: string;
  end: string;
  adjusted: boolean;
  output: string;
  /** Data rows in the CSV (union of trading dates). */
  rows: number;
  /** Tickers that made it into the CSV, in input order. */
  columns: string[];
  /** Per-ticker outcome, in input order. */
  tickers: FetchOutcome[];
}

/** Minimal HTTP GET abstraction so tests can inject canned responses. */
export type Transport = (url: string) => Promise<{ status: number; body: string }>;

/** Bad job parameters (empty ticker list, reversed dates, ...). */
export class ArgumentError extends Error {}

/** One ticker's download failed; retryable failures get backed-off retries. */
export class FetchFailure extends Error {
  constructor(message: string, public readonly retryable: boolean) {
    super(message);
  }
}

/** Every ticker in the job failed; the CLI exits non-zero on this. */
export class AllTickersFailedError extends Error {}
