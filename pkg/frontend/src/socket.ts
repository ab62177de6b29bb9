// Reconnecting WebSocket wrapper.  The constructor takes a factory so
// tests (and the node session driver) can inject their own socket
// implementation; the browser build passes the native WebSocket.

export interface SocketLike {
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  send(data: string): void;
  close(): void;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export class ReconnectingSocket {
  private sock: SocketLike | null = null;
  private delayMs = 500;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private factory: SocketFactory,
    private onText: (text: string) => void,
    private onStatus: (up: boolean) => void,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const sock = this.factory(this.url);
    this.sock = sock;
    sock.onopen = () => {
      this.delayMs = 500;
      this.onStatus(true);
    };
    sock.onmessage = (ev) => {
      if (typeof ev.data === "string") this.onText(ev.data);
    };
    sock.onerror = () => {
      // close follows; the handler there schedules the retry
    };
    sock.onclose = () => {
      this.onStatus(false);
      if (this.closed) return;
      this.timer = setTimeout(() => this.open(), this.delayMs);
      this.delayMs = Math.min(this.delayMs * 2, 8000);
    };
  }

  /** True when the text went out on an open socket. */
  send(obj: unknown): boolean {
    if (this.sock === null || this.sock.readyState !== OPEN) return false;
    this.sock.send(JSON.stringify(obj));
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.sock?.close();
  }
}
