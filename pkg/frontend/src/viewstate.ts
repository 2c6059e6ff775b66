/**
 * The single mutable view model the renderer reads each animation
 * frame. Messages mutate it through SessionClient; rendering is
 * decoupled via this latest-state buffer.
 */

import type { Pose, SummaryMsg } from "./protocol.js";

export type Mode = "idle" | "navigate" | "pattern_quiz" | "review";
export type Connection = "connecting" | "connected" | "disconnected";

export interface ViewState {
  mode: Mode;
  grid: number[];
  /** Session timer in ms, driven by server tick timestamps. */
  timerMs: number;
  connection: Connection;
  /** Reconnect / error banner text, null when nothing to show. */
  banner: string | null;
  /**
   * The scene map stays hidden during navigation (the wearer operates
   * in the dark); it appears only when the server streams debug poses
   * or after the run in review mode.
   */
  mapVisible: boolean;
  pose: Pose | null;
  /** Breadcrumb of poses for the post-run route reveal. */
  trace: Pose[];
  summary: SummaryMsg | null;
  quiz: {
    index: number;
    of: number;
    awaitingAnswer: boolean;
  } | null;
}

export function initialViewState(): ViewState {
  return {
    mode: "idle",
    grid: new Array(25).fill(0),
    timerMs: 0,
    connection: "connecting",
    banner: null,
    mapVisible: false,
    pose: null,
    trace: [],
    summary: null,
    quiz: null,
  };
}
