import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiError, Transport } from "../src/api.js";
import type { Timer } from "../src/debounce.js";

const here = dirname(fileURLToPath(import.meta.url));

/** Captured API payloads recorded from the query service over the packaged
 * fixture corpus (scripts/capture_ui_fixtures.py). */
export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

type Responder = unknown | ((path: string) => unknown);

export class StubTransport implements Transport {
  calls: string[] = [];
  posts: { path: string; body: unknown }[] = [];

  constructor(
    private routes: Record<string, Responder> = {},
    private postResult: Responder = { id: 1 },
  ) {}

  route(path: string, payload: Responder): this {
    this.routes[path] = payload;
    return this;
  }

  async get(path: string): Promise<unknown> {
    this.calls.push(path);
    if (!(path in this.routes)) {
      throw new ApiError(404, `GET ${path} -> 404`);
    }
    const responder = this.routes[path];
    const payload = typeof responder === "function" ? (responder as (p: string) => unknown)(path) : responder;
    if (payload instanceof Error) throw payload;
    return structuredClone(payload);
  }

  async post(path: string, body: unknown): Promise<unknown> {
    this.posts.push({ path, body });
    const payload =
      typeof this.postResult === "function"
        ? (this.postResult as (p: string) => unknown)(path)
        : this.postResult;
    if (payload instanceof Error) throw payload;
    return structuredClone(payload);
  }
}

/** Deterministic replacement for setTimeout-based debouncing. */
export class ManualTimer implements Timer {
  private tasks = new Map<number, () => void>();
  private nextId = 1;

  set(fn: () => void, _ms: number): unknown {
    const id = this.nextId++;
    this.tasks.set(id, fn);
    return id;
  }

  clear(handle: unknown): void {
    this.tasks.delete(handle as number);
  }

  fire(): void {
    const pending = [...this.tasks.values()];
    this.tasks.clear();
    for (const fn of pending) fn();
  }

  get pending(): number {
    return this.tasks.size;
  }
}

export async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function occurrences(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}
