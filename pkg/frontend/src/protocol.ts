/**
 * Message types for the session service's newline-delimited JSON
 * protocol, plus a narrowing parser. The UI never computes grids or
 * scores itself; everything it shows comes from these messages.
 */

export const GRID_CELLS = 25;
export const MAX_DUTY = 4095;

export type Direction =
  | "row_sweep"
  | "column_sweep"
  | "diagonal_sweep"
  | "static"
  | "unknown";

export type Simultaneity = "single" | "lower_multiple" | "higher_multiple";

/** Mirrors the server's trial log line format. */
export interface TrialRecord {
  pattern_id: string;
  answer_direction: Direction;
  answer_simultaneity: Simultaneity;
  timestamp: string;
}

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

export interface StartedMsg {
  type: "started";
  mode: "navigate" | "pattern";
  scene?: string;
  tick_hz?: number;
  count?: number;
}

export interface TickMsg {
  type: "tick";
  t_ms: number;
  grid: number[];
  pose?: Pose;
}

export interface PatternStartMsg {
  type: "pattern_start";
  index: number;
  of: number;
  pattern: string;
}

export interface PatternEndMsg {
  type: "pattern_end";
  index: number;
}

export interface SummaryMsg {
  type: "summary";
  mode: "navigate" | "pattern";
  scene?: string;
  completion_time_s?: number | null;
  did_not_finish?: boolean;
  collision_count?: number;
  table?: unknown;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMessage =
  | StartedMsg
  | TickMsg
  | PatternStartMsg
  | PatternEndMsg
  | SummaryMsg
  | ErrorMsg;

const isRecord = (v: unknown): v is Record<string, unknown> =>
  typeof v === "object" && v !== null;

const isGrid = (v: unknown): v is number[] =>
  Array.isArray(v) &&
  v.length === GRID_CELLS &&
  v.every((x) => typeof x === "number" && x >= 0);

/** Returns null for anything that is not a well-formed server message. */
export function parseServerMessage(obj: unknown): ServerMessage | null {
  if (!isRecord(obj) || typeof obj.type !== "string") return null;
  switch (obj.type) {
    case "started":
      return obj.mode === "navigate" || obj.mode === "pattern"
        ? (obj as unknown as StartedMsg)
        : null;
    case "tick":
      return typeof obj.t_ms === "number" && isGrid(obj.grid)
        ? (obj as unknown as TickMsg)
        : null;
    case "pattern_start":
      return typeof obj.index === "number" && typeof obj.pattern === "string"
        ? (obj as unknown as PatternStartMsg)
        : null;
    case "pattern_end":
      return typeof obj.index === "number"
        ? (obj as unknown as PatternEndMsg)
        : null;
    case "summary":
      return obj.mode === "navigate" || obj.mode === "pattern"
        ? (obj as unknown as SummaryMsg)
        : null;
    case "error":
      return typeof obj.message === "string"
        ? (obj as unknown as ErrorMsg)
        : null;
    default:
      return null;
  }
}
