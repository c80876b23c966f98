/**
 * Assemble per-ticker series into one price panel and serialize it.
 *
 * The CSV layout is the one the backtester ingests: header
 * `date,TICKER1,...`, ISO-8601 dates ascending, one row per trading day,
 * decimal-point floats.  The panel covers the union of all trading dates;
 * a ticker missing a date gets an empty cell (the consumer drops such
 * columns and reports them, rather than failing).
 */

import { Manifest, TickerSeries } from "./types";

export interface Panel {
  dates: string[];
  columns: string[];
  /** cells[row][col]; null marks a date the ticker did not trade. */
  cells: (number | null)[][];
}

/** Union-of-dates panel; column order follows the input series order. */
export function assemblePanel(series: TickerSeries[]): Panel {
  const dates = [...new Set(series.flatMap((s) => s.rows.map((r) => r.date)))].sort();
  const index = new Map(dates.map((d, i) => [d, i]));

  const columns = series.map((s) => s.ticker);
  const cells: (number | null)[][] = dates.map(() => columns.map(() => null));
  series.forEach((s, col) => {
    for (const row of s.rows) {
      cells[index.get(row.date)!][col] = row.close;
    }
  });
  return { dates, columns, cells };
}

/** Render the canonical CSV text (empty cell for a missing price). */
export function panelToCsv(panel: Panel): string {
  const lines = [`date,${panel.columns.join(",")}`];
  panel.dates.forEach((date, i) => {
    const row = panel.cells[i].map((v) => (v === null ? "" : String(v)));
    lines.push(`${date},${row.join(",")}`);
  });
  return lines.join("\n") + "\n";
}

export function manifestToJson(manifest: Manifest): string {
  return JSON.stringify(manifest, null, 2) + "\n";
}

/** Manifest path derived from the CSV path: prices.csv -> prices.manifest.json */
export function manifestPathFor(csvPath: string): string {
  return csvPath.replace(/\.csv$/i, "") + ".manifest.json";
}
