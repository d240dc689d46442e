// End-to-end checks against the real Python server:
//  1. a recorded 100-frame stream produces the same winners over the wire as
//     the offline batch replay, with per-frame round trips under 50 ms
//  2. a scripted 5-task session completes with a metrics table equal to the
//     server's result messages
import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { GazeSession } from "../src/client.js";
import { MetricsTable } from "../src/metrics.js";
import { anglesToDirection, directionToAngles, sub } from "../src/projection.js";
import { applyServerMessage, createViewModel } from "../src/viewmodel.js";
import type { ResultMsg, SceneMsg, ServerMessage, TaskMsg } from "../src/types.js";

const PYTHON = process.env.CASUALGAZE_PYTHON ?? "python3";

let server: ChildProcess;
let url = "";

beforeAll(async () => {
  server = spawn(PYTHON, [
    "-m", "casualgaze.cli", "serve",
    "--scene", "study2_room", "--port", "0", "--seed", "42",
  ]);
  url = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const match = chunk.toString().match(/ws:\/\/[\d.]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(`ws://127.0.0.1:${match[1]}`);
      }
    });
    server.stderr!.on("data", () => undefined);
    server.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
  });
}, 20000);

afterAll(() => {
  server?.kill();
});

interface Driver {
  session: GazeSession;
  nextMessage(): Promise<ServerMessage>;
  close(): void;
}

function openDriver(): Promise<{ driver: Driver; scene: SceneMsg; task: TaskMsg }> {
  const queue: ServerMessage[] = [];
  const waiters: Array<(msg: ServerMessage) => void> = [];
  const push = (msg: ServerMessage) => {
    const waiter = waiters.shift();
    if (waiter) waiter(msg);
    else queue.push(msg);
  };
  const nextMessage = () =>
    new Promise<ServerMessage>((resolve, reject) => {
      const ready = queue.shift();
      if (ready) return resolve(ready);
      const timer = setTimeout(() => reject(new Error("timed out waiting for message")), 10000);
      waiters.push((msg) => {
        clearTimeout(timer);
        resolve(msg);
      });
    });

  return new Promise((resolve, reject) => {
    const session = new GazeSession(
      url,
      {
        onMessage: push,
        onClose: () => undefined,
      },
      (u) => new WebSocket(u) as never,
    );
    const driver: Driver = { session, nextMessage, close: () => session.close() };
    (async () => {
      const scene = (await nextMessage()) as SceneMsg;
      const task = (await nextMessage()) as TaskMsg;
      if (scene.type !== "scene" || task.type !== "task") {
        reject(new Error(`bad handshake: ${scene.type}, ${task.type}`));
        return;
      }
      resolve({ driver, scene, task });
    })().catch(reject);
  });
}

function targetAngles(scene: SceneMsg, targetId: number): { phi: number; theta: number } {
  const device = scene.scene.devices.find((d) => d.id === targetId)!;
  return directionToAngles(sub(device.position, scene.scene.user.eye_pos));
}

describe("protocol round trip", () => {
  it("matches offline batch replay winners for a 100-frame stream", async () => {
    // a sweeping scripted gaze path across the scene
    const frames: Array<{ t: number; phi: number; theta: number }> = [];
    for (let i = 0; i < 100; i++) {
      frames.push({
        t: 0.04 * (i + 1),
        phi: -60 + i * 1.2,
        theta: -10 + 0.25 * i,
      });
    }

    const { driver } = await openDriver();
    const winners: Array<number | null> = [];
    const latencies: number[] = [];
    for (const f of frames) {
      const sent = performance.now();
      driver.session.gaze(f.t, f.phi, f.theta);
      const msg = await driver.nextMessage();
      latencies.push(performance.now() - sent);
      expect(msg.type).toBe("prediction");
      if (msg.type === "prediction") winners.push(msg.winner);
    }
    driver.close();

    const meanLatency = latencies.reduce((a, b) => a + b, 0) / latencies.length;
    expect(meanLatency).toBeLessThan(50);

    const stdin = frames
      .map((f) => JSON.stringify({ t: f.t, gaze_dir: anglesToDirection(f.phi, f.theta) }))
      .join("\n") + "\n";
    const proc = spawnSync(
      PYTHON,
      ["-m", "casualgaze.cli", "predict", "--scene", "study2_room"],
      { input: stdin, encoding: "utf8", timeout: 60000 },
    );
    expect(proc.status).toBe(0);
    const offline = proc.stdout
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line).winner as number | null);
    expect(winners).toEqual(offline);
  }, 60000);
});

describe("live session smoke test", () => {
  it("completes 5 tasks with a metrics table equal to the server results", async () => {
    const { driver, scene, task } = await openDriver();
    const vm = createViewModel();
    applyServerMessage(vm, scene);
    applyServerMessage(vm, task);

    const serverResults: ResultMsg[] = [];
    let currentTask = task;
    let t = 0;
    for (let round = 0; round < 5; round++) {
      const aim = targetAngles(scene, currentTask.target_id);
      let lastPrediction = null;
      for (let i = 0; i < 8; i++) {
        t += 0.04;
        driver.session.gaze(t, aim.phi, aim.theta);
        const msg = await driver.nextMessage();
        applyServerMessage(vm, msg);
        if (msg.type === "prediction") lastPrediction = msg;
      }
      expect(lastPrediction?.stable).toBe(true);
      driver.session.confirm(t);
      const result = (await driver.nextMessage()) as ResultMsg;
      expect(result.type).toBe("result");
      applyServerMessage(vm, result);
      serverResults.push(result);
      currentTask = (await driver.nextMessage()) as TaskMsg;
      expect(currentTask.type).toBe("task");
      applyServerMessage(vm, currentTask);
    }
    driver.close();

    // the client-side table mirrors the server's result stream exactly
    expect(vm.metrics.rows.length).toBe(5);
    vm.metrics.rows.forEach((row, i) => {
      expect(row.dt).toEqual(serverResults[i].dt);
      expect(row.ct).toEqual(serverResults[i].ct);
      expect(row.st).toEqual(serverResults[i].st);
      expect(row.correct).toEqual(serverResults[i].correct);
      expect(row.errorCount).toEqual(serverResults[i].error_count);
    });
    const summary = vm.metrics.summaries().find((s) => s.technique === "casualgaze")!;
    expect(summary.n).toBe(5);
    const detected = serverResults.filter((r) => r.st !== null);
    const want = detected.reduce((a, r) => a + (r.st ?? 0), 0) / detected.length;
    expect(summary.meanSt).toBeCloseTo(want, 9);

    // and every one of those tasks produced predictions only via the server
    const predictions = vm.messageLog.filter((m) => m.type === "prediction");
    expect(predictions.length).toBe(40);
  }, 60000);
});
