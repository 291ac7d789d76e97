/** Trajectory chart rendered as a static SVG string: one point per day,
 * symptom series on the 0..10 left axis, wound area on a secondary right
 * axis. A date selected with the slider (or by clicking a day) draws a
 * vertical value line and a per-series readout that stays on screen until
 * a different date is chosen. */

import type { Trajectory } from "../types.js";
import { AREA_SERIES, CHART, NRS_MAX, geometry, round2, seriesPath } from "../chart.js";
import { FALLBACK_SERIES_COLOR, PALETTE, seriesColor } from "../a11y.js";
import { esc, fmt } from "../html.js";

const SERIES_LABELS: Record<string, string> = {
  pain: "Pain",
  itching: "Itching",
  exudate: "Exudate",
  area_cm2: "Wound area (cm²)",
  mood: "Mood",
  activity_impact: "Activity impact",
  quality_of_life: "Quality of life",
};

export function seriesLabel(series: string): string {
  return SERIES_LABELS[series] ?? series.replace(/_/g, " ");
}

function axisTicksLeft(geo: ReturnType<typeof geometry>): string {
  const ticks: string[] = [];
  for (let v = 0; v <= NRS_MAX; v += 2) {
    const y = geo.yLeft(v);
    ticks.push(
      `<line x1="${CHART.left}" y1="${round2(y)}" x2="${CHART.left + geo.innerWidth}" y2="${round2(y)}" class="grid"></line>`,
      `<text x="${CHART.left - 6}" y="${round2(y + 4)}" text-anchor="end" class="tick">${v}</text>`,
    );
  }
  return ticks.join("");
}

function axisTicksRight(geo: ReturnType<typeof geometry>): string {
  const ticks: string[] = [];
  for (let i = 0; i <= 4; i += 1) {
    const v = (geo.areaMax * i) / 4;
    const y = geo.yRight(v);
    ticks.push(
      `<text x="${CHART.left + geo.innerWidth + 6}" y="${round2(y + 4)}" text-anchor="start" class="tick">${fmt(v)}</text>`,
    );
  }
  return ticks.join("");
}

function dateTicks(geo: ReturnType<typeof geometry>): string {
  const n = geo.dates.length;
  if (n === 0) {
    return "";
  }
  const indexes = n <= 6 ? geo.dates.map((_, i) => i) : [0, Math.floor((n - 1) / 2), n - 1];
  return indexes
    .map((i) => {
      const x = round2(geo.x(i));
      const label = geo.dates[i] ?? "";
      return `<text x="${x}" y="${CHART.height - CHART.bottom + 16}" text-anchor="middle" class="tick">${esc(label)}</text>`;
    })
    .join("");
}

function pointMarkers(trajectory: Trajectory, geo: ReturnType<typeof geometry>): string {
  const markers: string[] = [];
  for (const series of trajectory.series) {
    const color = seriesColor(series);
    trajectory.points.forEach((point, i) => {
      const value = point.values[series];
      if (value === undefined || value === null) {
        return;
      }
      const y = series === AREA_SERIES ? geo.yRight(value) : geo.yLeft(value);
      markers.push(
        `<circle cx="${round2(geo.x(i))}" cy="${round2(y)}" r="3" fill="${color}"></circle>`,
      );
    });
  }
  return markers.join("");
}

function valueLine(trajectory: Trajectory, geo: ReturnType<typeof geometry>, selectedDate: string): string {
  const index = geo.dates.indexOf(selectedDate);
  if (index < 0) {
    return "";
  }
  const x = round2(geo.x(index));
  return `<line x1="${x}" y1="${CHART.top}" x2="${x}" y2="${CHART.top + geo.innerHeight}" class="value-line"></line>`;
}

function readout(trajectory: Trajectory, selectedDate: string): string {
  const point = trajectory.points.find((p) => p.date === selectedDate);
  if (!point) {
    return "";
  }
  const rows = trajectory.series
    .map((series) => {
      const value = point.values[series];
      const shown = value === undefined || value === null ? "—" : fmt(value);
      return `<tr><td><span class="swatch" style="background:${seriesColor(series)}"></span> ${esc(seriesLabel(series))}</td><td>${esc(shown)}</td></tr>`;
    })
    .join("");
  return `
  <div class="card readout" aria-live="polite">
    <strong>${esc(selectedDate)}</strong>
    <table><tbody>${rows}</tbody></table>
  </div>`;
}

function legend(trajectory: Trajectory): string {
  const entries = trajectory.series
    .map(
      (series) =>
        `<span class="legend-entry"><span class="swatch" style="background:${seriesColor(series)}"></span>${esc(seriesLabel(series))}</span>`,
    )
    .join("");
  return `<div class="legend" aria-label="Series legend">${entries}</div>`;
}

export function renderTrajectory(trajectory: Trajectory, selectedDate: string | null): string {
  if (trajectory.points.length === 0) {
    return '<p class="muted">No reported values yet.</p>';
  }
  const geo = geometry(trajectory);
  const paths = trajectory.series
    .map((series) => {
      const d = seriesPath(trajectory, series, geo);
      if (!d) {
        return "";
      }
      const color = seriesColor(series) || FALLBACK_SERIES_COLOR;
      return `<path d="${d}" fill="none" stroke="${color}" stroke-width="2"></path>`;
    })
    .join("");
  const selected = selectedDate !== null && geo.dates.includes(selectedDate) ? selectedDate : null;
  const sliderIndex = selected === null ? geo.dates.length - 1 : geo.dates.indexOf(selected);
  const title = trajectory.kind === "general" ? "General health trajectory" : "Wound trajectory";
  return `
<section aria-label="${esc(title)}">
  <h2>${esc(title)}</h2>
  ${legend(trajectory)}
  <svg viewBox="0 0 ${CHART.width} ${CHART.height}" width="${CHART.width}" height="${CHART.height}" role="img" aria-label="${esc(title)} chart">
    <style>
      .grid { stroke: ${PALETTE.surface}; stroke-width: 1; }
      .tick { font: 11px sans-serif; fill: ${PALETTE.muted}; }
      .axis-label { font: 12px sans-serif; fill: ${PALETTE.text}; }
      .value-line { stroke: ${PALETTE.text}; stroke-width: 1.5; stroke-dasharray: 4 3; }
    </style>
    <rect x="0" y="0" width="${CHART.width}" height="${CHART.height}" fill="${PALETTE.background}"></rect>
    ${axisTicksLeft(geo)}
    ${axisTicksRight(geo)}
    ${dateTicks(geo)}
    <text x="${CHART.left}" y="${CHART.top - 4}" class="axis-label">Score (0–10)</text>
    <text x="${CHART.left + geo.innerWidth}" y="${CHART.top - 4}" text-anchor="end" class="axis-label">Area (cm²)</text>
    ${paths}
    ${pointMarkers(trajectory, geo)}
    ${selected === null ? "" : valueLine(trajectory, geo, selected)}
  </svg>
  <label class="row">Day
    <input type="range" min="0" max="${geo.dates.length - 1}" step="1" value="${sliderIndex}" data-action="select-day" aria-label="Select day">
  </label>
  ${selected === null ? "" : readout(trajectory, selected)}
</section>`.trim();
}
