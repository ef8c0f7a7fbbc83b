// Scenario picker: a pure projection of the server-provided catalog into
// options, disabled while an episode runs.

import { ScenarioEntry, StartMsg, startMsg } from "./protocol.js";

export interface PickerOption {
  id: string;
  label: string;
  policy: string;
  speedLimitKmh: number;
}

export interface PickerState {
  options: PickerOption[];
  enabled: boolean;
  empty: boolean;
}

export function pickerState(scenarios: ScenarioEntry[], running: boolean): PickerState {
  const options = scenarios.map((s) => ({
    id: s.id,
    label: `${s.policy.toUpperCase()} @ ${s.speed_limit_kmh} km/h`,
    policy: s.policy,
    speedLimitKmh: s.speed_limit_kmh,
  }));
  return { options, enabled: !running && options.length > 0, empty: options.length === 0 };
}

export function pickScenario(state: PickerState, id: string, seed?: number): StartMsg | null {
  if (!state.enabled) return null;
  if (!state.options.some((o) => o.id === id)) return null;
  return startMsg(id, seed);
}
