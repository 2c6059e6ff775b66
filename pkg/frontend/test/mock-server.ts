/**
 * In-process mock of the session service: hands the client a Transport
 * whose far end is driven imperatively by the test.
 */

import { LineBuffer, type Transport } from "../src/transport.js";

export class MockServer {
  /** Parsed messages the client sent, in order. */
  readonly received: Array<Record<string, unknown>> = [];
  closed = false;

  private toClient: Array<(line: string) => void> = [];
  private closeCbs: Array<() => void> = [];
  private fromClient = new LineBuffer((line) => {
    this.received.push(JSON.parse(line) as Record<string, unknown>);
  });

  /** Transport the client side connects through. */
  transport(): Transport {
    return {
      send: (line) => this.fromClient.push(line),
      close: () => this.drop(),
      onLine: (cb) => this.toClient.push(cb),
      onClose: (cb) => this.closeCbs.push(cb),
    };
  }

  emit(msg: Record<string, unknown>): void {
    const line = JSON.stringify(msg) + "\n";
    this.toClient.forEach((cb) => cb(line));
  }

  emitRaw(line: string): void {
    this.toClient.forEach((cb) => cb(line));
  }

  /** Simulates the connection dropping. */
  drop(): void {
    if (this.closed) return;
    this.closed = true;
    this.closeCbs.forEach((cb) => cb());
  }

  messagesOfType(type: string): Array<Record<string, unknown>> {
    return this.received.filter((m) => m.type === type);
  }
}

/** A deterministic scripted grid: cell k of tick i is (i * 31 + k) % 4096. */
export function scriptedGrid(i: number): number[] {
  return Array.from({ length: 25 }, (_, k) => (i * 31 + k) % 4096);
}
