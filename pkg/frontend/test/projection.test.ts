import { describe, expect, it } from "vitest";

import {
  anglesToDirection,
  anglesToPointer,
  angularRadiusDeg,
  directionToAngles,
  pointerToAngles,
} from "../src/projection.js";

const VIEW = { width: 1200, height: 600 };

describe("pointerToAngles", () => {
  it("maps the canvas center to (0, 0)", () => {
    const { phi, theta } = pointerToAngles(600, 300, VIEW);
    expect(phi).toBeCloseTo(0, 9);
    expect(theta).toBeCloseTo(0, 9);
  });

  it("maps the right edge to phi 120", () => {
    expect(pointerToAngles(1200, 300, VIEW).phi).toBeCloseTo(120, 9);
  });

  it("maps the top edge to theta 60", () => {
    expect(pointerToAngles(600, 0, VIEW).theta).toBeCloseTo(60, 9);
  });

  it("round-trips angle -> pixel -> angle within 0.1 degree", () => {
    for (let phi = -120; phi <= 120; phi += 7.3) {
      for (let theta = -60; theta <= 60; theta += 5.9) {
        const { x, y } = anglesToPointer(phi, theta, VIEW);
        const back = pointerToAngles(x, y, VIEW);
        expect(Math.abs(back.phi - phi)).toBeLessThan(0.1);
        expect(Math.abs(back.theta - theta)).toBeLessThan(0.1);
      }
    }
  });
});

describe("direction conversions", () => {
  it("forward is (0, 0)", () => {
    const { phi, theta } = directionToAngles([0, 0, 1]);
    expect(phi).toBeCloseTo(0, 9);
    expect(theta).toBeCloseTo(0, 9);
  });

  it("right is phi 90", () => {
    expect(directionToAngles([1, 0, 0]).phi).toBeCloseTo(90, 9);
  });

  it("round-trips angles through a unit vector", () => {
    for (let phi = -170; phi <= 170; phi += 23) {
      for (let theta = -80; theta <= 80; theta += 17) {
        const v = anglesToDirection(phi, theta);
        expect(Math.hypot(...v)).toBeCloseTo(1, 9);
        const back = directionToAngles(v);
        expect(back.phi).toBeCloseTo(phi, 6);
        expect(back.theta).toBeCloseTo(theta, 6);
      }
    }
  });
});

describe("angularRadiusDeg", () => {
  it("matches asin(r/d)", () => {
    expect(angularRadiusDeg(0.25, 3)).toBeCloseTo((Math.asin(0.25 / 3) * 180) / Math.PI, 9);
  });

  it("caps at 90 when inside the sphere", () => {
    expect(angularRadiusDeg(2, 1)).toBe(90);
  });
});
