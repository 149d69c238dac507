// Thin WebSocket client for the gateway. Correlates requests to replies,
// forwards pushed events and command results as ConsoleInput values so the
// reducer is the only consumer of server state. Browser-only; replay tests
// exercise the reducer on recorded logs instead of a live socket.

import type { ErrorFrame, EventFrame, ServerFrame } from "./protocol.js";
import type { ConsoleInput } from "./scene.js";

interface Pending {
  resolve: (frame: ServerFrame) => void;
  reject: (err: Error) => void;
}

export class GatewayError extends Error {
  constructor(
    public readonly kind: string,
    message: string,
  ) {
    super(`${kind}: ${message}`);
  }
}

export class GatewayConnection {
  private nextCorr = 1;
  private pending = new Map<number, Pending>();

  onInput: (input: ConsoleInput) => void = () => {};
  onClose: (reason: string) => void = () => {};

  private constructor(private readonly ws: WebSocket) {
    ws.onmessage = (ev) => this.handleMessage(String(ev.data));
    ws.onclose = (ev) => this.fail(`connection closed (${ev.code})`);
    ws.onerror = () => this.fail("socket error");
  }

  static open(url: string): Promise<GatewayConnection> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url);
      ws.onopen = () => resolve(new GatewayConnection(ws));
      ws.onerror = () => reject(new Error(`cannot reach gateway at ${url}`));
    });
  }

  close(): void {
    this.ws.close();
  }

  private fail(reason: string): void {
    for (const p of this.pending.values()) {
      p.reject(new Error(reason));
    }
    this.pending.clear();
    this.onClose(reason);
  }

  private handleMessage(text: string): void {
    let frame: ServerFrame;
    try {
      frame = JSON.parse(text) as ServerFrame;
    } catch {
      return; // server never sends invalid JSON; drop defensively
    }
    if (frame.type === "EVENT") {
      const ev = frame as EventFrame;
      this.onInput({ type: "event", topic: ev.topic, record: ev.record });
      return;
    }
    if (frame.type === "ERROR") {
      const err = frame as ErrorFrame;
      if (err.corr !== null && this.pending.has(err.corr)) {
        const p = this.pending.get(err.corr)!;
        this.pending.delete(err.corr);
        p.reject(new GatewayError(err.error, err.message));
      }
      return;
    }
    const corr = (frame as { corr?: number }).corr;
    if (typeof corr === "number" && this.pending.has(corr)) {
      const p = this.pending.get(corr)!;
      this.pending.delete(corr);
      p.resolve(frame);
    }
  }

  request(
    type: "SUBSCRIBE" | "PUBLISH" | "FETCH" | "COMMAND",
    fields: Record<string, unknown>,
  ): Promise<ServerFrame> {
    const corr = this.nextCorr++;
    return new Promise((resolve, reject) => {
      this.pending.set(corr, { resolve, reject });
      this.ws.send(JSON.stringify({ type, corr, ...fields }));
    });
  }

  async command(
    name: string,
    args: Record<string, unknown> = {},
  ): Promise<unknown> {
    const frame = await this.request("COMMAND", { name, args });
    const result = (frame as { result?: unknown }).result;
    this.onInput({ type: "command_result", name, args, result });
    return result;
  }

  async subscribe(topic: string, from = 0): Promise<void> {
    await this.request("SUBSCRIBE", { topic, from_offset: from });
  }
}
