/**
 * Protocol client and controller. Pure view/controller over the
 * session service: every grid and score shown comes off the wire.
 */

import type { Command } from "./keyboard.js";
import {
  parseServerMessage,
  type Direction,
  type ServerMessage,
  type Simultaneity,
  type TrialRecord,
} from "./protocol.js";
import type { Transport, TransportFactory } from "./transport.js";
import { initialViewState, type ViewState } from "./viewstate.js";

export interface ClientOptions {
  /** Unanswered quiz patterns are recorded as unknown after this. */
  answerTimeoutMs?: number;
  /** Called whenever a fresh grid is ready to paint. */
  onGrid?: (grid: number[]) => void;
}

const ANSWER_TIMEOUT_MS = 30_000;

export class SessionClient {
  readonly view: ViewState = initialViewState();
  /** One record per quiz pattern, in play order. */
  readonly trials: TrialRecord[] = [];
  /** Every grid received this session, in arrival order. */
  readonly grids: number[][] = [];

  private transport: Transport | null = null;
  private pendingCmd: Command | null = null;
  private currentPattern: string | null = null;
  private answerTimer: ReturnType<typeof setTimeout> | null = null;
  private readonly answerTimeoutMs: number;
  private readonly onGrid: (grid: number[]) => void;

  constructor(
    private readonly factory: TransportFactory,
    private readonly server: string,
    options: ClientOptions = {},
  ) {
    this.answerTimeoutMs = options.answerTimeoutMs ?? ANSWER_TIMEOUT_MS;
    this.onGrid = options.onGrid ?? (() => {});
  }

  async connect(): Promise<void> {
    this.view.connection = "connecting";
    try {
      this.transport = await this.factory(this.server);
    } catch (err) {
      this.view.connection = "disconnected";
      this.view.banner = `cannot reach ${this.server}`;
      throw err;
    }
    this.view.connection = "connected";
    this.view.banner = null;
    this.transport.onLine((line) => this.handleLine(line));
    this.transport.onClose(() => {
      this.view.connection = "disconnected";
      this.view.banner = "connection lost; reconnect starts a new session";
      this.clearAnswerTimer();
    });
  }

  /**
   * After a drop, only a brand new session is offered; the previous
   * run's partial state is discarded rather than resumed.
   */
  async reconnect(): Promise<void> {
    const fresh = initialViewState();
    Object.assign(this.view, fresh);
    this.trials.length = 0;
    this.grids.length = 0;
    this.pendingCmd = null;
    this.currentPattern = null;
    await this.connect();
  }

  startNavigate(scene: string): void {
    this.send({ type: "start", mode: "navigate", scene });
  }

  startPatternQuiz(stepMs?: number): void {
    const msg: Record<string, unknown> = { type: "start", mode: "pattern" };
    if (stepMs !== undefined) msg.step_ms = stepMs;
    this.send(msg);
  }

  /**
   * Latest-wins steering: keystrokes between ticks overwrite each
   * other and exactly one cmd goes out when the next tick arrives.
   */
  setCommand(cmd: Command): void {
    this.pendingCmd = cmd;
  }

  answer(direction: Direction, simultaneity: Simultaneity): void {
    if (!this.view.quiz?.awaitingAnswer || this.currentPattern === null) return;
    this.clearAnswerTimer();
    this.view.quiz.awaitingAnswer = false;
    this.send({ type: "answer", direction, simultaneity });
    this.recordTrial(direction, simultaneity);
  }

  close(): void {
    this.clearAnswerTimer();
    this.transport?.close();
  }

  private send(msg: Record<string, unknown>): void {
    this.transport?.send(JSON.stringify(msg) + "\n");
  }

  private recordTrial(
    direction: Direction,
    simultaneity: Simultaneity,
  ): void {
    this.trials.push({
      pattern_id: this.currentPattern ?? "?",
      answer_direction: direction,
      answer_simultaneity: simultaneity,
      timestamp: new Date().toISOString(),
    });
  }

  private clearAnswerTimer(): void {
    if (this.answerTimer !== null) {
      clearTimeout(this.answerTimer);
      this.answerTimer = null;
    }
  }

  private handleLine(line: string): void {
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      console.warn("dropping malformed server line", line.slice(0, 200));
      return;
    }
    const msg = parseServerMessage(obj);
    if (msg === null) {
      console.warn("dropping unrecognized server message", obj);
      return;
    }
    this.apply(msg);
  }

  private apply(msg: ServerMessage): void {
    const view = this.view;
    switch (msg.type) {
      case "started":
        view.mode = msg.mode === "navigate" ? "navigate" : "pattern_quiz";
        view.summary = null;
        view.trace = [];
        view.timerMs = 0;
        view.banner = null;
        if (msg.mode === "pattern") {
          view.quiz = { index: -1, of: msg.count ?? 0, awaitingAnswer: false };
        }
        break;
      case "tick":
        view.grid = msg.grid;
        view.timerMs = msg.t_ms;
        this.grids.push(msg.grid);
        this.onGrid(msg.grid);
        if (msg.pose) {
          view.pose = msg.pose;
          view.trace.push(msg.pose);
          view.mapVisible = true; // debug poses were enabled server-side
        }
        if (view.mode === "navigate" && this.pendingCmd !== null) {
          this.send({ type: "cmd", ...this.pendingCmd });
          this.pendingCmd = null;
        }
        break;
      case "pattern_start":
        this.currentPattern = msg.pattern;
        if (view.quiz) {
          view.quiz.index = msg.index;
          view.quiz.awaitingAnswer = false;
        }
        break;
      case "pattern_end":
        if (view.quiz) view.quiz.awaitingAnswer = true;
        this.clearAnswerTimer();
        this.answerTimer = setTimeout(
          () => this.answerTimedOut(),
          this.answerTimeoutMs,
        );
        break;
      case "summary":
        this.clearAnswerTimer();
        view.summary = msg;
        view.mode = "review";
        view.mapVisible = true; // route reveal after the run
        if (view.quiz) view.quiz.awaitingAnswer = false;
        break;
      case "error":
        view.banner = msg.message;
        break;
    }
  }

  private answerTimedOut(): void {
    this.answerTimer = null;
    if (!this.view.quiz?.awaitingAnswer) return;
    this.view.quiz.awaitingAnswer = false;
    // no answer goes out; the server times out too and scores it wrong
    this.recordTrial("unknown", "single");
  }
}
