/** Fixture loading and byte-exact snapshot comparison.
 *
 * Fixtures under tests/fixtures/ are recorded from a seeded demo service by
 * scripts/record_fixtures.py. Snapshots under tests/snapshots/ are committed
 * render outputs; set UPDATE_SNAPSHOTS=1 to rewrite them after an intended
 * rendering change. */

import { readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect } from "vitest";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "fixtures");
const SNAPSHOTS = join(HERE, "snapshots");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

export function checkSnapshot(name: string, content: string): void {
  const path = join(SNAPSHOTS, name);
  if (process.env["UPDATE_SNAPSHOTS"]) {
    writeFileSync(path, content);
    return;
  }
  let expected: string;
  try {
    expected = readFileSync(path, "utf8");
  } catch {
    throw new Error(`missing snapshot ${name}; run UPDATE_SNAPSHOTS=1 npm test to record it`);
  }
  expect(content, `snapshot ${name}`).toBe(expected);
}
