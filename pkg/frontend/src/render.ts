// Canvas rendering: devices as labeled circles in the equirectangular view,
// gaze crosshair, task target marker, and the server-driven highlight.

import { anglesToPointer, angularRadiusDeg, directionToAngles, norm, sub } from "./projection.js";
import type { ViewModel } from "./viewmodel.js";
import { highlight } from "./viewmodel.js";

const COLORS = {
  background: "#10141a",
  grid: "#222a33",
  device: "#4a6785",
  deviceFill: "rgba(74, 103, 133, 0.25)",
  label: "#aebdcc",
  target: "#ffb500",
  highlightStable: "#36d26a",
  highlightUnstable: "#8ad2a3",
  gaze: "#ff5c5c",
};

export function renderScene(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const view = { width: ctx.canvas.width, height: ctx.canvas.height };
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, view.width, view.height);

  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  for (let phi = -120; phi <= 120; phi += 30) {
    const { x } = anglesToPointer(phi, 0, view);
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, view.height);
    ctx.stroke();
  }
  for (let theta = -60; theta <= 60; theta += 30) {
    const { y } = anglesToPointer(0, theta, view);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(view.width, y);
    ctx.stroke();
  }

  if (!vm.scene) {
    return;
  }
  const eye = vm.scene.user.eye_pos;
  const hl = highlight(vm);
  const pxPerDegX = view.width / 240;

  for (const device of vm.scene.devices) {
    const toDevice = sub(device.position, eye);
    const { phi, theta } = directionToAngles(toDevice);
    const { x, y } = anglesToPointer(phi, theta, view);
    const radiusPx = Math.max(4, angularRadiusDeg(device.radius, norm(toDevice)) * pxPerDegX);

    ctx.beginPath();
    ctx.arc(x, y, radiusPx, 0, 2 * Math.PI);
    ctx.fillStyle = COLORS.deviceFill;
    ctx.fill();
    ctx.setLineDash([]);
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = COLORS.device;

    if (vm.task && device.id === vm.task.targetId) {
      ctx.strokeStyle = COLORS.target;
      ctx.lineWidth = 2;
    }
    if (hl && device.id === hl.deviceId) {
      ctx.strokeStyle = hl.stable ? COLORS.highlightStable : COLORS.highlightUnstable;
      ctx.lineWidth = 3;
      ctx.setLineDash(hl.stable ? [] : [6, 4]);
    }
    ctx.stroke();
    ctx.setLineDash([]);

    ctx.fillStyle = COLORS.label;
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${device.id} ${device.name}`, x, y + radiusPx + 12);
  }

  const { x: gx, y: gy } = anglesToPointer(vm.gaze.phi, vm.gaze.theta, view);
  ctx.strokeStyle = COLORS.gaze;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(gx - 10, gy);
  ctx.lineTo(gx + 10, gy);
  ctx.moveTo(gx, gy - 10);
  ctx.lineTo(gx, gy + 10);
  ctx.stroke();
}
