// Running selection-efficiency metrics, aggregated client-side per technique.
// Mirrors the server's aggregation rules: undetected trials (null DT/CT) are
// excluded from the time means but always count toward accuracy.

import type { ResultMsg } from "./types.js";

export interface TaskRow {
  technique: string;
  targetId: number;
  correct: boolean;
  dt: number | null;
  ct: number | null;
  st: number | null;
  errorCount: number;
}

export interface TechniqueSummary {
  technique: string;
  n: number;
  accuracy: number;
  meanDt: number | null;
  meanCt: number | null;
  meanSt: number | null;
  meanErrors: number;
}

export class MetricsTable {
  readonly rows: TaskRow[] = [];

  add(technique: string, result: ResultMsg): TaskRow {
    const row: TaskRow = {
      technique,
      targetId: result.target_id,
      correct: result.correct,
      dt: result.dt,
      ct: result.ct,
      st: result.st,
      errorCount: result.error_count,
    };
    this.rows.push(row);
    return row;
  }

  summaries(): TechniqueSummary[] {
    const byTech = new Map<string, TaskRow[]>();
    for (const row of this.rows) {
      const group = byTech.get(row.technique) ?? [];
      group.push(row);
      byTech.set(row.technique, group);
    }
    const mean = (xs: number[]) => (xs.length ? xs.reduce((a, b) => a + b, 0) / xs.length : null);
    return [...byTech.entries()].map(([technique, group]) => ({
      technique,
      n: group.length,
      accuracy: group.filter((r) => r.correct).length / group.length,
      meanDt: mean(group.map((r) => r.dt).filter((x): x is number => x !== null)),
      meanCt: mean(group.map((r) => r.ct).filter((x): x is number => x !== null)),
      meanSt: mean(group.map((r) => r.st).filter((x): x is number => x !== null)),
      meanErrors: group.reduce((a, r) => a + r.errorCount, 0) / group.length,
    }));
  }
}
