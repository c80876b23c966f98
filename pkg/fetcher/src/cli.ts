#!/usr/bin/env node
/**
 * price-fetcher fetch --tickers file --start YYYY-MM-DD --end YYYY-MM-DD --out prices.csv
 *
 * Downloads daily close prices for every ticker in the file and writes one
 * CSV panel (date,TICKER1,...) plus a JSON manifest of per-ticker outcomes.
 * Exit codes: 0 success (including partial failures — see the manifest),
 * 1 every ticker failed, 2 bad arguments.
 */

import * as fs from "fs";
import yargs from "yargs";

import { runFetchJob } from "./job";
import { AllTickersFailedError, ArgumentError, FetchJob, Transport } from "./types";
import { httpTransport } from "./yahoo";

/** Tickers from a text file: whitespace-separated, # starts a comment. */
export function readTickerFile(path: string): string[] {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch {
    throw new ArgumentError(`cannot read tickers file ${path}`);
  }
  const tickers: string[] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.split("#", 1)[0].trim();
    if (!line) continue;
    tickers.push(...line.split(/\s+/));
  }
  return tickers;
}

interface FetchArgs {
  tickers: string;
  start: string;
  end: string;
  out: string;
  adjusted: boolean;
  "max-retries": number;
  "backoff-seconds": number;
  concurrency: number;
}

async function runFetchCommand(args: FetchArgs, transport: Transport): Promise<number> {
  const job: FetchJob = {
    tickers: readTickerFile(args.tickers),
    start: args.start,
    end: args.end,
    out: args.out,
    adjusted: args.adjusted,
    retry: { maxRetries: args["max-retries"], backoffSeconds: args["backoff-seconds"] },
    concurrency: args.concurrency,
  };
  const result = await runFetchJob(job, transport, (line) => console.log(line));
  const failed = result.manifest.tickers.filter((t) => t.status === "error");
  console.log(
    `wrote ${result.csvPath} (${result.manifest.rows} rows, ` +
      `${result.manifest.columns.length} tickers) and ${result.manifestPath}`,
  );
  if (failed.length > 0) {
    console.log(`${failed.length} ticker(s) failed — see the manifest`);
  }
  return 0;
}

export async function main(argv: string[], transport: Transport = httpTransport): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv)
    .scriptName("price-fetcher")
    .usage("$0 fetch --tickers file --start YYYY-MM-DD --end YYYY-MM-DD --out prices.csv")
    .command(
      "fetch",
      "download daily close prices into a CSV panel",
      (y) =>
        y
          .option("tickers", {
            type: "string",
            demandOption: true,
            describe: "file listing tickers (whitespace-separated, # comments)",
          })
          .option("start", { type: "string", demandOption: true, describe: "first date, inclusive" })
          .option("end", { type: "string", demandOption: true, describe: "last date, inclusive" })
          .option("out", { type: "string", demandOption: true, describe: "output CSV path" })
          .option("adjusted", {
            type: "boolean",
            default: false,
            describe: "write split/dividend-adjusted closes",
          })
          .option("max-retries", { type: "number", default: 2 })
          .option("backoff-seconds", { type: "number", default: 1 })
          .option("concurrency", { type: "number", default: 4 }),
      async (args) => {
        exitCode = await runFetchCommand(args as unknown as FetchArgs, transport);
      },
    )
    .demandCommand(1, "specify a command (fetch)")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new ArgumentError(msg ?? "bad arguments");
    });

  try {
    await parser.parseAsync();
    return exitCode;
  } catch (err) {
    if (err instanceof ArgumentError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if (err instanceof AllTickersFailedError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 2;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
