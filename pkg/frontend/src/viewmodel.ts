// Client-side session state. Every highlight traces to a server prediction
// message: nothing here computes a winner locally, it only records what the
// server said (verifiable through `messageLog`).

import { MetricsTable } from "./metrics.js";
import type { PredictionMsg, ResultMsg, SceneDoc, ServerMessage } from "./types.js";

export type ConnectionStatus = "connecting" | "live" | "closed";

export interface ViewModel {
  scene: SceneDoc | null;
  technique: string;
  availableTechniques: string[];
  task: { targetId: number; name: string } | null;
  gaze: { phi: number; theta: number };
  headYaw: number;
  lastPrediction: PredictionMsg | null;
  lastResult: ResultMsg | null;
  lastError: string | null;
  metrics: MetricsTable;
  status: ConnectionStatus;
  messageLog: ServerMessage[];
}

export function createViewModel(): ViewModel {
  return {
    scene: null,
    technique: "casualgaze",
    availableTechniques: ["precise", "knn", "casualgaze"],
    task: null,
    gaze: { phi: 0, theta: 0 },
    headYaw: 0,
    lastPrediction: null,
    lastResult: null,
    lastError: null,
    metrics: new MetricsTable(),
    status: "connecting",
  messageLog: [],
  };
}

/** The device the UI highlights, or null; dimmed when not yet stable. */
export function highlight(vm: ViewModel): { deviceId: number; stable: boolean } | null {
  const pred = vm.lastPrediction;
  if (!pred || pred.winner === null) {
    return null;
  }
  return { deviceId: pred.winner, stable: pred.stable };
}

export function applyServerMessage(vm: ViewModel, msg: ServerMessage): void {
  vm.messageLog.push(msg);
  switch (msg.type) {
    case "scene":
      vm.scene = msg.scene;
      vm.technique = msg.config.technique;
      vm.availableTechniques = msg.config.techniques;
      vm.lastPrediction = null;
      break;
    case "task":
      vm.task = { targetId: msg.target_id, name: msg.name };
      break;
    case "prediction":
      vm.lastPrediction = msg;
      break;
    case "result":
      vm.lastResult = msg;
      vm.metrics.add(vm.technique, msg);
      break;
    case "error":
      vm.lastError = `${msg.code}: ${msg.message}`;
      break;
  }
}
