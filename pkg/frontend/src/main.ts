// Session loop: mouse is the gaze proxy, streamed at the configured frame
// rate; click or spacebar confirms; selectors switch technique and scene.

import { GazeSession } from "./client.js";
import { pointerToAngles } from "./projection.js";
import { renderScene } from "./render.js";
import { applyServerMessage, createViewModel, ViewModel } from "./viewmodel.js";

const FRAME_RATE_HZ = 25;
const SERVER_URL = (window as { CASUALGAZE_WS_URL?: string }).CASUALGAZE_WS_URL
  ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(x: number | null): string {
  return x === null ? "-" : x.toFixed(3);
}

function renderMetrics(vm: ViewModel): void {
  const tbody = el<HTMLTableSectionElement>("metrics-body");
  tbody.innerHTML = "";
  for (const row of vm.metrics.rows) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${row.technique}</td><td>${row.targetId}</td>` +
      `<td>${row.correct ? "yes" : "no"}</td>` +
      `<td>${fmt(row.dt)}</td><td>${fmt(row.ct)}</td><td>${fmt(row.st)}</td>` +
      `<td>${row.errorCount}</td>`;
    tbody.appendChild(tr);
  }
  const summary = el<HTMLTableSectionElement>("summary-body");
  summary.innerHTML = "";
  for (const s of vm.metrics.summaries()) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${s.technique}</td><td>${s.n}</td>` +
      `<td>${(s.accuracy * 100).toFixed(1)}%</td>` +
      `<td>${fmt(s.meanDt)}</td><td>${fmt(s.meanCt)}</td><td>${fmt(s.meanSt)}</td>` +
      `<td>${s.meanErrors.toFixed(2)}</td>`;
    summary.appendChild(tr);
  }
}

function start(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d")!;
  const status = el<HTMLSpanElement>("status");
  const taskLabel = el<HTMLSpanElement>("task");
  const techniqueSelect = el<HTMLSelectElement>("technique");
  const sceneSelect = el<HTMLSelectElement>("scene-select");
  const yawSlider = el<HTMLInputElement>("head-yaw");
  const yawValue = el<HTMLSpanElement>("head-yaw-value");

  const vm = createViewModel();
  const t0 = performance.now();
  const now = () => (performance.now() - t0) / 1000;

  const session = new GazeSession(SERVER_URL, {
    onOpen: () => {
      vm.status = "live";
      status.textContent = `live @ ${SERVER_URL}`;
    },
    onClose: () => {
      vm.status = "closed";
      status.textContent = "disconnected - restart the server and reload";
    },
    onMessage: (msg) => {
      applyServerMessage(vm, msg);
      if (msg.type === "scene") {
        techniqueSelect.innerHTML = vm.availableTechniques
          .map((t) => `<option value="${t}" ${t === vm.technique ? "selected" : ""}>${t}</option>`)
          .join("");
      }
      if (msg.type === "task" && vm.task) {
        taskLabel.textContent = `look at: ${vm.task.name} (#${vm.task.targetId})`;
      }
      if (msg.type === "result") {
        renderMetrics(vm);
      }
      if (msg.type === "error" && vm.lastError) {
        status.textContent = vm.lastError;
      }
    },
  });

  canvas.addEventListener("mousemove", (event) => {
    const rect = canvas.getBoundingClientRect();
    const { phi, theta } = pointerToAngles(
      ((event.clientX - rect.left) / rect.width) * canvas.width,
      ((event.clientY - rect.top) / rect.height) * canvas.height,
      { width: canvas.width, height: canvas.height },
    );
    vm.gaze = { phi, theta };
  });

  const confirm = () => session.confirm(now());
  canvas.addEventListener("click", confirm);
  window.addEventListener("keydown", (event) => {
    if (event.code === "Space") {
      event.preventDefault();
      confirm();
    }
  });

  techniqueSelect.addEventListener("change", () => {
    vm.technique = techniqueSelect.value;
    session.setTechnique(techniqueSelect.value);
  });
  sceneSelect.addEventListener("change", () => session.setScene(sceneSelect.value));
  yawSlider.addEventListener("input", () => {
    vm.headYaw = Number(yawSlider.value);
    yawValue.textContent = `${vm.headYaw}°`;
  });

  window.setInterval(() => {
    if (vm.status === "live") {
      session.gaze(now(), vm.gaze.phi, vm.gaze.theta, vm.headYaw);
    }
  }, 1000 / FRAME_RATE_HZ);

  const repaint = () => {
    renderScene(ctx, vm);
    requestAnimationFrame(repaint);
  };
  repaint();
}

window.addEventListener("load", start);
