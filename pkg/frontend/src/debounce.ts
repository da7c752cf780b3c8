export interface Timer {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const realTimer: Timer = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

/** Trailing-edge debounce; the timer is injectable for tests. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
  timer: Timer = realTimer,
): (...args: A) => void {
  let handle: unknown;
  return (...args: A) => {
    if (handle !== undefined) timer.clear(handle);
    handle = timer.set(() => {
      handle = undefined;
      fn(...args);
    }, ms);
  };
}
