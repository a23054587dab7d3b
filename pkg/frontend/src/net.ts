/**
 * Websocket channel with automatic reconnect.
 *
 * Disconnection shows through the status callback (the UI paints a banner
 * and disables inputs); nothing is buffered while down — sends are dropped,
 * and the next tick payload after reconnect resynchronizes the view.
 */
import { ClientMessage, parseServerMessage, ServerMessage } from "./protocol.js";

export type ChannelStatus = "connecting" | "connected" | "disconnected";

export interface ChannelCallbacks {
  onMessage(msg: ServerMessage): void;
  onStatus(status: ChannelStatus): void;
}

/** Minimal surface of a WebSocket, for injecting fakes in tests. */
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

const OPEN = 1;
const BACKOFF_BASE_MS = 500;
const BACKOFF_CAP_MS = 8000;

export class Channel {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly callbacks: ChannelCallbacks,
    private readonly socketFactory: (url: string) => SocketLike = (u) =>
      new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    this.closed = false;
    this.callbacks.onStatus("connecting");
    const sock = this.socketFactory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.attempts = 0;
      this.callbacks.onStatus("connected");
    };
    sock.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg === null) {
        console.warn("dropping off-schema message");
        return;
      }
      this.callbacks.onMessage(msg);
    };
    sock.onclose = () => {
      this.socket = null;
      this.callbacks.onStatus("disconnected");
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.timer !== null) return;
    const delay = Math.min(
      BACKOFF_BASE_MS * 2 ** this.attempts,
      BACKOFF_CAP_MS,
    );
    this.attempts += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      if (!this.closed) this.connect();
    }, delay);
  }

  /** Returns false (message dropped) unless the socket is open. */
  send(msg: ClientMessage): boolean {
    if (this.socket === null || this.socket.readyState !== OPEN) return false;
    this.socket.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.socket?.close();
    this.socket = null;
  }
}
