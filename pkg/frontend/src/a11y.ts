/** Color palette and the WCAG contrast arithmetic that pins it.
 *
 * Accessibility floor: sans-serif type, text contrast >= 4.5:1, and
 * button/slider-only interactions (no swipe or press-and-hold anywhere).
 * The palette below is asserted against the floor by tests. */

export const PALETTE = {
  background: "#ffffff",
  surface: "#eef2f5",
  text: "#15222e",
  muted: "#43586a",
  link: "#0b4fd4",
  buttonBg: "#15385f",
  buttonText: "#ffffff",
  dangerBg: "#8f1d2c",
  dangerText: "#ffffff",
} as const;

/** One dark, white-background-legible color per known series. */
export const SERIES_COLORS: Record<string, string> = {
  pain: "#a11d33",
  itching: "#6b21a8",
  exudate: "#0f766e",
  area_cm2: "#1d4ed8",
  mood: "#9d174d",
  activity_impact: "#92400e",
  quality_of_life: "#166534",
};

export const FALLBACK_SERIES_COLOR = "#334155";

export const SLOT_STATE_COLORS: Record<string, string> = {
  available: "#166534",
  booked: "#92400e",
  confirmed: "#1d4ed8",
  completed: "#475569",
  cancelled: "#8f1d2c",
};

export function seriesColor(name: string): string {
  return SERIES_COLORS[name] ?? FALLBACK_SERIES_COLOR;
}

function channel(hex: string, offset: number): number {
  return parseInt(hex.slice(offset, offset + 2), 16) / 255;
}

function linearize(c: number): number {
  return c <= 0.04045 ? c / 12.92 : ((c + 0.055) / 1.055) ** 2.4;
}

export function relativeLuminance(hex: string): number {
  if (!/^#[0-9a-f]{6}$/i.test(hex)) throw new Error(`not a #rrggbb color: ${hex}`);
  const r = linearize(channel(hex, 1));
  const g = linearize(channel(hex, 3));
  const b = linearize(channel(hex, 5));
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

export function contrastRatio(a: string, b: string): number {
  const la = relativeLuminance(a);
  const lb = relativeLuminance(b);
  const [hi, lo] = la >= lb ? [la, lb] : [lb, la];
  return (hi + 0.05) / (lo + 0.05);
}
