/** WebSocket wrapper feeding the view model. */

import { ViewModel } from "./viewmodel.js";

export class Client {
  private ws: WebSocket | null = null;

  constructor(private vm: ViewModel, private url: string) {}

  connect(): void {
    this.vm.connection = "connecting";
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.vm.connection = "open";
    };
    ws.onmessage = (ev) => {
      this.vm.ingest(typeof ev.data === "string" ? ev.data : "");
    };
    ws.onclose = () => {
      this.vm.connection = "closed";
    };
    ws.onerror = () => {
      this.vm.lastError = `connection error (${this.url})`;
    };
  }

  send(message: string): boolean {
    if (this.ws === null || this.vm.connection !== "open") {
      return false;
    }
    this.ws.send(message);
    return true;
  }
}

/** Server URL from the `server` query parameter, with a local default. */
export function serverUrlFromLocation(search: string): string {
  const params = new URLSearchParams(search);
  return params.get("server") ?? "ws://127.0.0.1:8765";
}
