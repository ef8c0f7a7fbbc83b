// Feeds frames captured from a real bridge session through the whole client
// pipeline: parse -> view -> scene/card. Guards the protocol contract
// against drift between the server and this cockpit.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { EpisodeEndMsg, StateMsg, parseServerMsg } from "../src/protocol.js";
import { applyServerMsg, deriveScene, emptyView, endCard, sceneOf } from "../src/view.js";

const here = dirname(fileURLToPath(import.meta.url));
const capture = readFileSync(join(here, "fixtures", "session_capture.jsonl"), "utf-8")
  .split("\n")
  .filter((line) => line.length > 0);

describe("captured live session", () => {
  it("every frame parses and applies", () => {
    let view = emptyView();
    let states = 0;
    for (const raw of capture) {
      const msg = parseServerMsg(raw);
      expect(msg, `unparsable frame: ${raw.slice(0, 80)}`).not.toBeNull();
      view = applyServerMsg(view, msg!);
      if (msg!.kind === "state") {
        states += 1;
        const scene = sceneOf(view)!;
        expect(scene.shapes.length).toBeGreaterThanOrEqual(4);
        expect(scene.hud.t).toBe((msg as StateMsg).t);
      }
    }
    expect(view.sessionId).not.toBeNull();
    expect(view.scenarios).toHaveLength(9);
    expect(states).toBeGreaterThan(10);
    expect(view.episodeEnd).not.toBeNull();
  });

  it("end card equals the server's episode_end verbatim", () => {
    const endRaw = capture[capture.length - 1];
    const end = parseServerMsg(endRaw) as EpisodeEndMsg;
    expect(end.kind).toBe("episode_end");
    const card = endCard(end);
    expect(card.tta).toBe(end.tta);
    expect(card.classification).toBe(end.classification);
    // Exact reparse: the displayed number is the payload number.
    expect(card.tta).toBe(JSON.parse(endRaw).tta);
  });

  it("blind zone polygon and countdowns render from real payloads", () => {
    const state = capture
      .map((raw) => parseServerMsg(raw))
      .find((m) => m?.kind === "state" && (m as StateMsg).av !== null) as StateMsg;
    const scene = deriveScene(state);
    const blind = scene.shapes.find((s) => s.kind === "poly")!;
    expect(blind.points.length).toBe(5);
    expect(scene.hud.hvToConflict).toBe(state.countdown.hv_to_conflict);
  });
});
