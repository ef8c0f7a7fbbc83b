"""Real-time session server for human-in-the-loop driving.

Exposes the episode engine over a local WebSocket so a person can drive the
truck against any car policy. JSON text frames, one message per frame:

  server -> client
    {"kind": "hello", "version": 1, "session_id": str, "schema": "intersim-bridge-1"}
    {"kind": "scenario_list", "scenarios": [{"id", "policy", "speed_limit_kmh", "label"}]}
    {"kind": "state", "t", "step", "av": {...}|null, "hv": {...}, "f_theta",
     "blind_zone": [[x, y], ...], "decision": {...}|null, "aeb": bool,
     "countdown": {"hv_to_conflict", "av_to_conflict", "interaction_started",
                   "algorithm_on"}}
    {"kind": "episode_end", "tta", "classification", "summary": {...}}
    {"kind": "error", "message": str}

  client -> server
    {"kind": "start", "scenario_id": str, "seed": int?}
    {"kind": "control", "throttle": 0..1, "brake": 0..1, "timestamp": float}

The human's throttle/brake map to truck acceleration with the truck's
physical bounds; the last control received holds until replaced and is
applied no later than the next simulation step. Completed sessions persist
the same trace format as headless episodes plus the per-step control log, so
a recorded session replays byte-for-byte offline.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json
import secrets
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve

from .config import ScenarioConfig
from .sim import KMH, EpisodeEngine, EpisodeRecord, run_episode
from .recording import write_control_log, write_trace

PROTOCOL_VERSION = 1
SCHEMA = "intersim-bridge-1"

SPEED_PRESETS_KMH = (20.0, 45.0, 70.0)
POLICY_CHOICES = ("sc", "nosc", "rss")


def scenario_catalog(base: ScenarioConfig) -> dict[str, ScenarioConfig]:
    """Policy x speed-limit grid offered to the cockpit."""
    catalog: dict[str, ScenarioConfig] = {}
    for policy in POLICY_CHOICES:
        for limit in SPEED_PRESETS_KMH:
            sid = f"{policy}_{int(limit)}"
            catalog[sid] = dataclasses.replace(
                base,
                policy=policy,
                initial_speed=limit / KMH,
                world=dataclasses.replace(base.world, speed_limit=limit / KMH),
                driver=dataclasses.replace(base.driver, variant="external"),
                label=sid,
            )
    return catalog


def state_message(engine: EpisodeEngine) -> dict:
    av = engine.av
    d = engine.last_decision
    world = engine.world
    return {
        "kind": "state",
        "t": round(engine.t, 6),
        "step": engine.step_idx,
        "av": None if av is None else {"s": av.s, "v": av.v, "a": av.a,
                                       "x": av.x, "y": av.y,
                                       "length": av.length, "width": av.width,
                                       "heading": av.heading},
        "hv": {"s": engine.hv.s, "v": engine.hv.v, "a": engine.hv.a,
               "x": engine.hv.x, "y": engine.hv.y,
               "length": engine.hv.length, "width": engine.hv.width,
               "heading": engine.hv.heading},
        "f_theta": engine.f_theta,
        "blind_zone": [[x, y] for x, y in engine.blind_zone_world()],
        "decision": None if d is None or engine.phase not in (engine.ACTIVE, engine.EPILOGUE)
        else {"strategy": d.strategy.value, "reason": d.selection_reason,
              "accel": d.accel_cmd},
        "aeb": engine.guard.latched,
        "countdown": {
            "hv_to_conflict": engine.geom.conflict_entry_hv - engine.hv.s,
            "av_to_conflict": None if av is None else engine.geom.conflict_entry_av - av.s,
            "interaction_started": engine.phase >= engine.APPROACH,
            "algorithm_on": engine.phase >= engine.ACTIVE,
        },
        "conflict_rect": list(world.conflict_rect()),
        "lane_width_av": world.lane_width_av,
        "lane_width_hv": world.lane_width_hv,
        "speed_limit_kmh": world.speed_limit * KMH,
    }


def end_message(record: EpisodeRecord) -> dict:
    return {
        "kind": "episode_end",
        "tta": record.tta,
        "classification": record.classification,
        "summary": {
            "leader": record.leader,
            "speed_bin": record.speed_bin,
            "v0_kmh": record.v0_activation_kmh,
            "aeb_fired": record.aeb_fired,
            "collision": record.collision,
            "end_t": record.end_t,
            "norm_time": record.normalized_crossing_time,
            "aborted": record.aborted,
        },
    }


def replay_control_log(scenario: ScenarioConfig, log: list[tuple[float, float]]) -> EpisodeRecord:
    """Re-run a recorded session headless; reproduces the live trace exactly."""
    scenario = dataclasses.replace(
        scenario, driver=dataclasses.replace(scenario.driver, variant="external"))

    def feed(step: int):
        if step < len(log):
            return log[step]
        return None

    return run_episode(scenario, control_feed=feed)


class BridgeServer:
    """One live session at a time; sequential episodes per connection."""

    def __init__(self, base: ScenarioConfig, out_dir: str | Path | None = None,
                 realtime_factor: float = 1.0):
        self.base = base
        self.catalog = scenario_catalog(base)
        self.out_dir = Path(out_dir) if out_dir else None
        self.realtime_factor = realtime_factor
        self._busy = False
        self._episode_counter = 0

    async def handler(self, websocket) -> None:
        if self._busy:
            await websocket.send(json.dumps(
                {"kind": "error", "message": "another session is active"}))
            await websocket.close()
            return
        self._busy = True
        session_id = secrets.token_hex(4)
        try:
            await websocket.send(json.dumps({
                "kind": "hello", "version": PROTOCOL_VERSION,
                "session_id": session_id, "schema": SCHEMA}))
            await websocket.send(json.dumps({
                "kind": "scenario_list",
                "scenarios": [
                    {"id": sid, "policy": cfg.policy,
                     "speed_limit_kmh": round(cfg.world.speed_limit * KMH, 1),
                     "label": cfg.label}
                    for sid, cfg in self.catalog.items()],
            }))
            async for raw in websocket:
                msg = self._parse(raw)
                if msg is None:
                    await websocket.send(json.dumps(
                        {"kind": "error", "message": "malformed message"}))
                    continue
                if msg.get("kind") == "start":
                    await self._run_session(websocket, session_id, msg)
                elif msg.get("kind") == "control":
                    # Controls outside an episode are ignored silently.
                    continue
                else:
                    await websocket.send(json.dumps(
                        {"kind": "error",
                         "message": f"unknown kind {msg.get('kind')!r}"}))
        finally:
            self._busy = False

    @staticmethod
    def _parse(raw) -> dict | None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, TypeError):
            return None
        return msg if isinstance(msg, dict) else None

    async def _run_session(self, websocket, session_id: str, start_msg: dict) -> None:
        sid = start_msg.get("scenario_id")
        if sid not in self.catalog:
            await websocket.send(json.dumps(
                {"kind": "error", "message": f"unknown scenario {sid!r}"}))
            return
        scenario = self.catalog[sid]
        if "seed" in start_msg:
            try:
                scenario = scenario.with_seed(int(start_msg["seed"]))
            except (TypeError, ValueError):
                await websocket.send(json.dumps(
                    {"kind": "error", "message": "seed must be an integer"}))
                return

        engine = EpisodeEngine(scenario)
        control = (0.0, 0.0)
        aborted = False
        interval = (engine.world.dt / self.realtime_factor
                    if self.realtime_factor > 0 else 0.0)
        loop = asyncio.get_running_loop()
        next_tick = loop.time()

        async def receiver():
            nonlocal control
            async for raw in websocket:
                msg = self._parse(raw)
                if msg is None:
                    await websocket.send(json.dumps(
                        {"kind": "error", "message": "malformed message"}))
                    continue
                kind = msg.get("kind")
                if kind == "control":
                    control = (float(msg.get("throttle", 0.0)),
                               float(msg.get("brake", 0.0)))
                elif kind == "start":
                    await websocket.send(json.dumps(
                        {"kind": "error", "message": "episode already running"}))
                else:
                    await websocket.send(json.dumps(
                        {"kind": "error", "message": f"unknown kind {kind!r}"}))

        recv_task = asyncio.create_task(receiver())
        try:
            while not engine.done:
                engine.set_control(*control)
                engine.tick()
                await websocket.send(json.dumps(state_message(engine)))
                if interval > 0:
                    next_tick += interval
                    delay = next_tick - loop.time()
                    if delay > 0:
                        await asyncio.sleep(delay)
                else:
                    await asyncio.sleep(0)
        except Exception:
            aborted = True
        finally:
            recv_task.cancel()
            try:
                await recv_task
            except (asyncio.CancelledError, Exception):
                pass

        record = engine.record
        if aborted or not engine.done:
            record.aborted = True
            record.classification = "Failed"
        self._persist(record, engine.scenario, session_id)
        if not aborted:
            try:
                await websocket.send(json.dumps(end_message(record)))
            except Exception:
                pass

    def _persist(self, record: EpisodeRecord, scenario: ScenarioConfig,
                 session_id: str) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._episode_counter += 1
        stem = f"hil_{session_id}_{self._episode_counter:03d}"
        write_trace(record, scenario, self.out_dir / f"{stem}.trace.jsonl")
        if record.control_log is not None:
            write_control_log(record, self.out_dir / f"{stem}.controls.jsonl")

    async def serve_forever(self, host: str = "127.0.0.1", port: int = 8720,
                            ready: asyncio.Event | None = None) -> None:
        async with ws_serve(self.handler, host, port) as server:
            if ready is not None:
                ready.set()
            await server.serve_forever()


def serve(config: ScenarioConfig, port: int = 8720, host: str = "127.0.0.1",
          out_dir: str | Path | None = None, realtime_factor: float = 1.0) -> None:
    """Blocking entry point used by the CLI `serve` subcommand."""
    server = BridgeServer(config, out_dir=out_dir, realtime_factor=realtime_factor)
    asyncio.run(server.serve_forever(host=host, port=port))
