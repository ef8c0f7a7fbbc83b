"""Trace and summary serialization.

Episode traces are line-delimited JSON: a header object, one object per
simulation step, and a final end object. Batch outputs are CSV tables with a
``# config_hash=...`` comment line first. Schemas:

header  {"kind": "header", "schema": "intersim-trace-1", "config_hash", "policy",
         "seed", "label", "initial_speed", "speed_limit"}
step    {"step", "t", "phase", "av": {s,v,a_cmd,x,y}, "hv": {...}, "f",
         "aeb", "decision": null | {strategy, reason, accel, u_s, f_game,
         equilibria, components}}
arrival {..., "arrival": true, "leader", "lag_l", "lag_v"}
end     {"kind": "end", "tta", "classification", "leader", "speed_bin",
         "v0_kmh", "arrival_t", "end_t", "aeb_fired", "aeb_post_arrival",
         "collision", "overspeed", "co_occupied", "norm_time", "aborted"}
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import ScenarioConfig
from .sim import SPEED_BINS, BatchSummary, EpisodeRecord

SCHEMA = "intersim-trace-1"


def trace_header(record: EpisodeRecord, scenario: ScenarioConfig) -> dict:
    return {
        "kind": "header",
        "schema": SCHEMA,
        "config_hash": record.config_hash,
        "policy": record.policy,
        "seed": record.seed,
        "label": record.label,
        "initial_speed": scenario.initial_speed,
        "speed_limit": scenario.world.speed_limit,
    }


def trace_end(record: EpisodeRecord) -> dict:
    return {
        "kind": "end",
        "tta": record.tta,
        "classification": record.classification,
        "leader": record.leader,
        "speed_bin": record.speed_bin,
        "v0_kmh": record.v0_activation_kmh,
        "arrival_t": record.arrival_t,
        "end_t": record.end_t,
        "aeb_fired": record.aeb_fired,
        "aeb_post_arrival": record.aeb_post_arrival,
        "collision": record.collision,
        "overspeed": record.overspeed,
        "co_occupied": record.co_occupied,
        "norm_time": record.normalized_crossing_time,
        "aborted": record.aborted,
    }


def trace_lines(record: EpisodeRecord, scenario: ScenarioConfig):
    yield json.dumps(trace_header(record, scenario), sort_keys=True)
    for row in record.steps:
        yield json.dumps(row, sort_keys=True)
    yield json.dumps(trace_end(record), sort_keys=True)


def write_trace(record: EpisodeRecord, scenario: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text("\n".join(trace_lines(record, scenario)) + "\n")


def read_trace(path: str | Path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line]


def write_control_log(record: EpisodeRecord, path: str | Path) -> None:
    lines = [json.dumps({"kind": "header", "schema": "intersim-controls-1",
                         "config_hash": record.config_hash, "seed": record.seed})]
    for i, (throttle, brake) in enumerate(record.control_log or []):
        lines.append(json.dumps({"step": i, "throttle": throttle, "brake": brake}))
    Path(path).write_text("\n".join(lines) + "\n")


def read_control_log(path: str | Path) -> list[tuple[float, float]]:
    out = []
    for line in Path(path).read_text().splitlines():
        if not line:
            continue
        row = json.loads(line)
        if row.get("kind") == "header":
            continue
        out.append((row["throttle"], row["brake"]))
    return out


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def episodes_csv(summary: BatchSummary, config_hash: str) -> str:
    """Per-episode metric rows for one policy."""
    cols = ["index", "policy", "seed", "label", "speed_bin", "v0_kmh",
            "classification", "tta", "leader", "lag_l", "lag_v", "aeb",
            "collision", "co_occupied", "overspeed", "norm_time", "end_t"]
    lines = [f"# config_hash={config_hash}", ",".join(cols)]
    for row in summary.rows:
        lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def counts_csv(summaries: list[BatchSummary], config_hash: str) -> str:
    """Interaction-case statistics table: policy x metric x speed bin."""
    lines = [f"# config_hash={config_hash}",
             "policy,metric," + ",".join(SPEED_BINS) + ",All"]
    for s in summaries:
        for metric in ("Total", "Danger", "FullStop", "Normal", "Failed"):
            per_bin = [s.counts[b].get(metric, 0) for b in SPEED_BINS]
            lines.append(",".join([s.policy, metric] + [str(c) for c in per_bin]
                                  + [str(sum(per_bin))]))
    return "\n".join(lines) + "\n"


def lagging_csv(summaries: list[BatchSummary], config_hash: str) -> str:
    """Lagging-vehicle end-state distributions, split by which vehicle led."""
    lines = [f"# config_hash={config_hash}",
             "policy,leader,index,lag_l,lag_v,tta,classification"]
    for s in summaries:
        for row in s.rows:
            if row["classification"] == "Failed" or row["leader"] is None:
                continue
            lines.append(",".join([
                s.policy, row["leader"], str(row["index"]),
                _csv_cell(row["lag_l"]), _csv_cell(row["lag_v"]),
                _csv_cell(row["tta"]), row["classification"]]))
    return "\n".join(lines) + "\n"


def fixture_series_csv(record: EpisodeRecord) -> str:
    """Per-step data of one episode shaped for plotting (speeds, commands, F, decision)."""
    lines = [f"# config_hash={record.config_hash}",
             "t,av_s,av_v,av_a,hv_s,hv_v,hv_a,f,decision,aeb"]
    for row in record.steps:
        if row.get("arrival"):
            continue
        dec = row.get("decision") or {}
        lines.append(",".join([
            _csv_cell(row["t"]),
            _csv_cell(row["av"]["s"]), _csv_cell(row["av"]["v"]), _csv_cell(row["av"]["a_cmd"]),
            _csv_cell(row["hv"]["s"]), _csv_cell(row["hv"]["v"]), _csv_cell(row["hv"]["a_cmd"]),
            _csv_cell(row.get("f")),
            dec.get("strategy", ""),
            _csv_cell(row.get("aeb", False)),
        ]))
    return "\n".join(lines) + "\n"
