// Cockpit client: WebSocket lifecycle, control streaming, view updates.

import { PedalInput, readGamepad } from "./input.js";
import { ControlMsg, StartMsg, controlMsg, parseServerMsg } from "./protocol.js";
import { SessionView, applyServerMsg, emptyView, setConnection } from "./view.js";

export const SEND_HZ = 20;

export interface ClientHooks {
  onViewChange(view: SessionView): void;
}

export class CockpitClient {
  view: SessionView = emptyView();
  private ws: WebSocket | null = null;
  private sendTimer: ReturnType<typeof setInterval> | null = null;
  readonly pedals: PedalInput;

  constructor(private readonly endpoint: string,
              private readonly hooks: ClientHooks,
              now: () => number = () => performance.now() / 1000) {
    this.pedals = new PedalInput(now);
  }

  connect(): void {
    this.update(setConnection(this.view, "connecting"));
    const ws = new WebSocket(this.endpoint);
    this.ws = ws;
    ws.onopen = () => this.update(setConnection(this.view, "connected"));
    ws.onmessage = (ev) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg !== null) this.update(applyServerMsg(this.view, msg));
    };
    ws.onclose = () => {
      this.stopSending();
      this.pedals.releaseAll();
      this.update(setConnection(this.view, "disconnected"));
    };
    ws.onerror = () => {
      this.update({ ...this.view, lastError: "connection error" });
    };
  }

  start(msg: StartMsg): void {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) return;
    this.ws.send(JSON.stringify(msg));
    this.startSending();
  }

  private startSending(): void {
    if (this.sendTimer !== null) return;
    this.sendTimer = setInterval(() => {
      const pads = typeof navigator !== "undefined" && navigator.getGamepads
        ? navigator.getGamepads()
        : [];
      const analog = readGamepad(Array.from(pads));
      if (analog !== null) this.pedals.setAnalog(analog[0], analog[1]);
      const sample = this.pedals.sample();
      this.send(controlMsg(sample.throttle, sample.brake, sample.timestamp));
    }, 1000 / SEND_HZ);
  }

  private stopSending(): void {
    if (this.sendTimer !== null) {
      clearInterval(this.sendTimer);
      this.sendTimer = null;
    }
  }

  private send(msg: ControlMsg): void {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  private update(view: SessionView): void {
    this.view = view;
    this.hooks.onViewChange(view);
    if (view.episodeEnd !== null) this.stopSending();
  }
}
