import { readFileSync } from "node:fs";

/** Raw fixture bytes as UTF-8 text; fixtures were recorded straight off
 * the wire, so comparisons against them are byte comparisons. */
export function fixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8");
}

export function jsonFixture<T>(name: string): T {
  return JSON.parse(fixture(name)) as T;
}
