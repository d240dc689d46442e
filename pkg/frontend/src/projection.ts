// Equirectangular mapping between canvas pixels and gaze angles.
// phi spans [-120, 120] across the width, theta [-60, 60] down the height
// (screen y grows downward, theta grows upward).

import type { Vec3 } from "./types.js";

export const PHI_SPAN = 120;
export const THETA_SPAN = 60;

export interface Viewport {
  width: number;
  height: number;
}

export function pointerToAngles(px: number, py: number, view: Viewport): { phi: number; theta: number } {
  const phi = (px / view.width) * 2 * PHI_SPAN - PHI_SPAN;
  const theta = THETA_SPAN - (py / view.height) * 2 * THETA_SPAN;
  return { phi, theta };
}

export function anglesToPointer(phi: number, theta: number, view: Viewport): { x: number; y: number } {
  const x = ((phi + PHI_SPAN) / (2 * PHI_SPAN)) * view.width;
  const y = ((THETA_SPAN - theta) / (2 * THETA_SPAN)) * view.height;
  return { x, y };
}

const DEG = 180 / Math.PI;

export function directionToAngles(v: Vec3): { phi: number; theta: number } {
  const [x, y, z] = v;
  const phi = Math.atan2(x, z) * DEG;
  const theta = Math.atan2(y, Math.hypot(x, z)) * DEG;
  return { phi, theta };
}

export function anglesToDirection(phi: number, theta: number): Vec3 {
  const p = phi / DEG;
  const t = theta / DEG;
  const ct = Math.cos(t);
  return [ct * Math.sin(p), Math.sin(t), ct * Math.cos(p)];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

/** Apparent angular radius of a sphere, degrees. */
export function angularRadiusDeg(radius: number, distance: number): number {
  return Math.asin(Math.min(1, radius / distance)) * DEG;
}
