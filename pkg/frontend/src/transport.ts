/**
 * Transport abstraction over any browser-compatible bidirectional
 * line stream (WebSocket bridge, WebTransport, a test double). The
 * client only needs newline-delimited text in both directions.
 */

export interface Transport {
  send(line: string): void;
  close(): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
}

/** Resolves once the connection is open, rejects if it cannot open. */
export type TransportFactory = (server: string) => Promise<Transport>;

/** Buffers chunks and emits complete lines; partial tails are kept. */
export class LineBuffer {
  private buffer = "";

  constructor(private onLine: (line: string) => void) {}

  push(chunk: string): void {
    this.buffer += chunk;
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) !== -1) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) this.onLine(line);
    }
  }
}

/** Transport over a browser WebSocket that forwards text frames as lines. */
export function webSocketTransport(server: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(`ws://${server}`);
    const lineCbs: Array<(line: string) => void> = [];
    const closeCbs: Array<() => void> = [];
    const buffer = new LineBuffer((line) => lineCbs.forEach((cb) => cb(line)));
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") buffer.push(ev.data);
    };
    ws.onclose = () => closeCbs.forEach((cb) => cb());
    ws.onerror = () => reject(new Error(`cannot reach ${server}`));
    ws.onopen = () =>
      resolve({
        send: (line) => ws.send(line),
        close: () => ws.close(),
        onLine: (cb) => lineCbs.push(cb),
        onClose: (cb) => closeCbs.push(cb),
      });
  });
}

/** Reads `?server=host:port` from the page URL. */
export function serverFromQuery(search: string, fallback: string): string {
  const value = new URLSearchParams(search).get("server");
  return value && value.length > 0 ? value : fallback;
}
