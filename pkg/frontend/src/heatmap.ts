/**
 * Heatmap rendering math. Cell brightness is a monotone function of
 * motor intensity with 0 mapped to fully dark, standing in for the
 * vibration the wearer would feel.
 */

import { GRID_CELLS, MAX_DUTY } from "./protocol.js";

export const GRID_SIZE = 5;

/** 0..255 brightness, strictly monotone in intensity, 0 -> 0. */
export function brightness(intensity: number, maxDuty = MAX_DUTY): number {
  if (intensity <= 0) return 0;
  const clamped = Math.min(intensity, maxDuty);
  // never drop a nonzero intensity to fully dark
  return Math.max(1, Math.round((255 * clamped) / maxDuty));
}

/** CSS color for one cell; warm scale so low levels stay visible. */
export function cellColor(intensity: number, maxDuty = MAX_DUTY): string {
  const b = brightness(intensity, maxDuty);
  return `rgb(${b},${Math.round(b * 0.25)},0)`;
}

/** Row-major 25-cell grid to a 5x5 array of CSS colors. */
export function gridColors(grid: number[], maxDuty = MAX_DUTY): string[][] {
  if (grid.length !== GRID_CELLS) {
    throw new Error(`expected ${GRID_CELLS} cells, got ${grid.length}`);
  }
  const rows: string[][] = [];
  for (let r = 0; r < GRID_SIZE; r++) {
    rows.push(
      grid
        .slice(r * GRID_SIZE, (r + 1) * GRID_SIZE)
        .map((v) => cellColor(v, maxDuty)),
    );
  }
  return rows;
}
