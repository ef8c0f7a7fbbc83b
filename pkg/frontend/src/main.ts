// Wiring: canvas + HUD + picker against a bridge endpoint. The endpoint is
// configurable by query parameter: ?endpoint=ws://127.0.0.1:8720

import { CockpitClient } from "./client.js";
import { pickScenario, pickerState } from "./picker.js";
import { defaultCamera, drawScene } from "./render.js";
import { SessionView, endCard, sceneOf } from "./view.js";

const params = new URLSearchParams(window.location.search);
const endpoint = params.get("endpoint") ?? "ws://127.0.0.1:8720";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const hudEl = document.getElementById("hud")!;
const pickerEl = document.getElementById("picker") as HTMLSelectElement;
const startBtn = document.getElementById("start") as HTMLButtonElement;
const banner = document.getElementById("banner")!;
const card = document.getElementById("endcard")!;

function fmt(x: number | null | undefined, digits = 1): string {
  return x === null || x === undefined ? "-" : x.toFixed(digits);
}

function renderView(view: SessionView): void {
  banner.textContent =
    view.connection === "connected"
      ? (view.lastError ?? "")
      : `bridge ${view.connection} - inputs disabled`;
  banner.className = view.connection === "connected" && !view.lastError ? "ok" : "warn";

  const picker = pickerState(view.scenarios, view.running);
  pickerEl.disabled = !picker.enabled;
  startBtn.disabled = !picker.enabled;
  if (pickerEl.options.length !== picker.options.length) {
    pickerEl.innerHTML = "";
    if (picker.empty) {
      const opt = document.createElement("option");
      opt.textContent = "no scenarios offered";
      pickerEl.appendChild(opt);
    }
    for (const o of picker.options) {
      const opt = document.createElement("option");
      opt.value = o.id;
      opt.textContent = o.label;
      pickerEl.appendChild(opt);
    }
  }

  const scene = sceneOf(view);
  if (scene !== null) {
    drawScene(ctx, defaultCamera(canvas.width, canvas.height), scene);
    const h = scene.hud;
    const f = h.fTheta === null ? "-" : h.fTheta.toFixed(2);
    const fBar = h.fTheta === null ? "" : "#".repeat(Math.round(h.fTheta * 20));
    const badge = h.aeb ? "AEB" : h.decision === null ? "-" : h.decision.toUpperCase();
    hudEl.textContent = [
      `t ${fmt(h.t)} s   limit ${fmt(h.speedLimitKmh, 0)} km/h   ${h.algorithmOn ? "ALGORITHM ON" : h.interactionStarted ? "interaction" : "approach"}`,
      `truck ${fmt(h.hvSpeedKmh)} km/h  ->conflict ${fmt(h.hvToConflict)} m`,
      `car   ${fmt(h.avSpeedKmh)} km/h  ->conflict ${fmt(h.avToConflict)} m`,
      `F(theta) ${f} ${fBar}`,
      `decision ${badge}${h.decisionReason ? ` (${h.decisionReason})` : ""}`,
    ].join("\n");
  }

  if (view.episodeEnd !== null) {
    const c = endCard(view.episodeEnd);
    card.hidden = false;
    card.textContent = [
      `episode over: ${c.classification}`,
      `TTA ${c.tta === null ? "-" : c.tta}`,
      `leader ${c.leader ?? "-"}  v0 ${fmt(c.v0Kmh)} km/h  AEB ${c.aebFired ? "yes" : "no"}`,
    ].join("\n");
  } else {
    card.hidden = true;
  }
}

const client = new CockpitClient(endpoint, { onViewChange: renderView });
client.connect();

window.addEventListener("keydown", (ev) => {
  client.pedals.keyDown(ev.key);
  if (ev.key === "ArrowUp" || ev.key === "ArrowDown") ev.preventDefault();
});
window.addEventListener("keyup", (ev) => client.pedals.keyUp(ev.key));
window.addEventListener("blur", () => client.pedals.releaseAll());

startBtn.addEventListener("click", () => {
  const picker = pickerState(client.view.scenarios, client.view.running);
  const msg = pickScenario(picker, pickerEl.value);
  if (msg !== null) client.start(msg);
});
