/** Pure geometry for the trajectory chart: one point per day on the x-axis,
 * numeric-rating series (0..10) on the left y-axis, the area series on a
 * secondary right y-axis sharing the same x positions. */

import type { Trajectory } from "./types.js";

export const CHART = {
  width: 640,
  height: 280,
  top: 16,
  right: 56,
  bottom: 36,
  left: 40,
} as const;

export const NRS_MAX = 10;
export const AREA_SERIES = "area_cm2";

export interface ChartGeometry {
  dates: string[];
  innerWidth: number;
  innerHeight: number;
  areaMax: number;
  x(index: number): number;
  yLeft(value: number): number;
  yRight(value: number): number;
}

/** Smallest "nice" ceiling (1/2/5 ladder) at or above the maximum. */
export function niceCeil(max: number): number {
  if (!(max > 0)) return 1;
  const power = Math.floor(Math.log10(max));
  for (const step of [1, 2, 5, 10]) {
    const candidate = step * 10 ** power;
    if (candidate >= max) return candidate;
  }
  return 10 ** (power + 1);
}

export function geometry(trajectory: Trajectory): ChartGeometry {
  const dates = trajectory.points.map((p) => p.date);
  const innerWidth = CHART.width - CHART.left - CHART.right;
  const innerHeight = CHART.height - CHART.top - CHART.bottom;
  const areaValues = trajectory.points
    .map((p) => p.values[AREA_SERIES])
    .filter((v): v is number => typeof v === "number");
  const areaMax = niceCeil(Math.max(0, ...areaValues));
  const x = (index: number): number =>
    dates.length <= 1
      ? CHART.left + innerWidth / 2
      : CHART.left + (index * innerWidth) / (dates.length - 1);
  const yFor = (value: number, max: number): number =>
    CHART.top + innerHeight * (1 - value / max);
  return {
    dates,
    innerWidth,
    innerHeight,
    areaMax,
    x,
    yLeft: (v) => yFor(v, NRS_MAX),
    yRight: (v) => yFor(v, areaMax),
  };
}

/** SVG path for one series; gaps in the data break the line. */
export function seriesPath(trajectory: Trajectory, series: string, geo: ChartGeometry): string {
  const commands: string[] = [];
  let pen = false;
  trajectory.points.forEach((point, i) => {
    const value = point.values[series];
    if (typeof value !== "number") {
      pen = false;
      return;
    }
    const y = series === AREA_SERIES ? geo.yRight(value) : geo.yLeft(value);
    commands.push(`${pen ? "L" : "M"} ${round2(geo.x(i))} ${round2(y)}`);
    pen = true;
  });
  return commands.join(" ");
}

export function round2(value: number): number {
  return Number(value.toFixed(2));
}
