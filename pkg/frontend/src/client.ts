// WebSocket session wrapper. The constructor is injectable so tests can run
// under node with the `ws` package while the browser uses the native one.

import type { ClientMessage, ServerMessage } from "./types.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "close", listener: () => void): void;
  addEventListener(type: "message", listener: (event: { data: unknown }) => void): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface SessionHandlers {
  onMessage: (msg: ServerMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
}

export class GazeSession {
  private ws: WebSocketLike;
  private lastGazeT = -Infinity;

  constructor(url: string, handlers: SessionHandlers, factory?: WebSocketFactory,
              hello: { scene?: string; seed?: number } = {}) {
    const make: WebSocketFactory =
      factory ?? ((u) => new WebSocket(u) as unknown as WebSocketLike);
    this.ws = make(url);
    this.ws.addEventListener("open", () => {
      this.send({ type: "hello", ...hello });
      handlers.onOpen?.();
    });
    this.ws.addEventListener("message", (event) => {
      handlers.onMessage(JSON.parse(String(event.data)) as ServerMessage);
    });
    this.ws.addEventListener("close", () => handlers.onClose?.());
  }

  private send(msg: ClientMessage): void {
    this.ws.send(JSON.stringify(msg));
  }

  /** Sends a gaze frame; drops anything that would violate increasing t. */
  gaze(t: number, phi: number, theta: number, headYaw?: number): boolean {
    if (t <= this.lastGazeT) {
      return false;
    }
    this.lastGazeT = t;
    const msg: ClientMessage = { type: "gaze", t, phi, theta };
    if (headYaw !== undefined && headYaw !== 0) {
      msg.head_yaw = headYaw;
    }
    this.send(msg);
    return true;
  }

  confirm(t: number): void {
    this.send({ type: "confirm", t });
  }

  setTechnique(name: string): void {
    this.send({ type: "set_technique", name });
  }

  setScene(name: string): void {
    this.send({ type: "set_scene", name });
  }

  close(): void {
    this.ws.close();
  }
}
