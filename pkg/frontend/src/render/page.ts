/** Page shell and stylesheet. Sans-serif type, high-contrast palette,
 * consistent layout, and controls that are buttons or sliders only. */

import { PALETTE } from "../a11y.js";
import { esc } from "../html.js";

export function stylesheet(): string {
  return `
  :root { color-scheme: light; }
  * { box-sizing: border-box; }
  body {
    margin: 0;
    font-family: system-ui, "Segoe UI", Roboto, Helvetica, Arial, sans-serif;
    background: ${PALETTE.background};
    color: ${PALETTE.text};
    font-size: 16px;
    line-height: 1.45;
  }
  header.app {
    background: ${PALETTE.buttonBg};
    color: ${PALETTE.buttonText};
    padding: 12px 20px;
    display: flex;
    justify-content: space-between;
    align-items: center;
  }
  main { padding: 20px; max-width: 960px; margin: 0 auto; }
  h1 { font-size: 20px; margin: 0; }
  h2 { font-size: 18px; margin: 24px 0 8px; }
  h3 { font-size: 16px; margin: 16px 0 8px; }
  table { border-collapse: collapse; width: 100%; }
  th, td { text-align: left; padding: 8px 10px; border-bottom: 1px solid ${PALETTE.surface}; }
  th { color: ${PALETTE.muted}; font-weight: 600; }
  button {
    font: inherit;
    background: ${PALETTE.buttonBg};
    color: ${PALETTE.buttonText};
    border: none;
    border-radius: 6px;
    padding: 8px 14px;
    cursor: pointer;
    min-height: 40px;
  }
  button.danger { background: ${PALETTE.dangerBg}; color: ${PALETTE.dangerText}; }
  button:focus-visible { outline: 3px solid ${PALETTE.link}; outline-offset: 2px; }
  input[type="range"] { width: 100%; min-height: 40px; }
  input[type="number"], input[type="text"], input[type="password"] {
    font: inherit; padding: 8px; border: 1px solid ${PALETTE.muted}; border-radius: 6px;
  }
  .card { background: ${PALETTE.surface}; border-radius: 8px; padding: 16px; margin: 12px 0; }
  .muted { color: ${PALETTE.muted}; }
  .badge {
    display: inline-block;
    padding: 2px 8px;
    border-radius: 999px;
    color: ${PALETTE.buttonText};
    font-size: 13px;
  }
  .row { display: flex; gap: 12px; flex-wrap: wrap; align-items: center; }
  figure { margin: 0; position: relative; }
  figure img { max-width: 100%; display: block; }
  figcaption { font-size: 14px; color: ${PALETTE.muted}; }
  .counter { font-weight: 600; color: ${PALETTE.text}; }
  .mask-overlay {
    position: absolute; left: 0; top: 0; width: 100%; height: 100%;
    pointer-events: none; image-rendering: pixelated;
  }
  .review-figure { max-width: 480px; }
  .review-figure img { cursor: crosshair; }
  .legend { display: flex; gap: 16px; flex-wrap: wrap; margin: 8px 0; }
  .legend-entry { display: inline-flex; align-items: center; gap: 6px; }
  .swatch { display: inline-block; width: 14px; height: 14px; border-radius: 3px; }
  .readout table { width: auto; }
  ul.slots, ul.endpoints { list-style: none; padding: 0; margin: 8px 0; }
  li.slot { display: flex; gap: 10px; align-items: center; padding: 6px 0; }
  table.size caption { text-align: left; font-weight: 600; padding: 4px 0; }
  label { display: block; margin: 8px 0; }
  .notice { border-left: 4px solid ${PALETTE.link}; }
  `.trim();
}

export function renderPage(title: string, body: string): string {
  return [
    "<!doctype html>",
    '<html lang="en">',
    "<head>",
    '<meta charset="utf-8">',
    '<meta name="viewport" content="width=device-width, initial-scale=1">',
    `<title>${esc(title)}</title>`,
    `<style>${stylesheet()}</style>`,
    "</head>",
    "<body>",
    '<header class="app">',
    `<h1>${esc(title)}</h1>`,
    '<button data-action="help" aria-label="Help for this screen">Help</button>',
    "</header>",
    `<main>${body}</main>`,
    "</body>",
    "</html>",
  ].join("\n");
}
