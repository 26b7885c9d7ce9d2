/** Small shared helpers: rate limiting and cluster colors. */

/** Trailing-edge debounce with a minimum spacing between executions.
 *
 * The threshold slider uses spacing 200 ms, capping cluster refetches at
 * five per second however fast the slider moves.
 */
export function rateLimited<A extends unknown[]>(
  fn: (...args: A) => void,
  spacingMs: number,
  now: () => number = () => Date.now(),
  schedule: (cb: () => void, ms: number) => unknown = (cb, ms) => setTimeout(cb, ms),
): (...args: A) => void {
  let lastRun = -Infinity;
  let queued = false;
  let lastArgs: A;
  const runner = () => {
    queued = false;
    lastRun = now();
    fn(...lastArgs);
  };
  return (...args: A) => {
    lastArgs = args;
    const wait = lastRun + spacingMs - now();
    if (wait <= 0) {
      runner();
    } else if (!queued) {
      queued = true;
      schedule(runner, wait);
    }
  };
}

const PALETTE = [
  "#4878a8", "#e4953b", "#5a9a68", "#c04b4b", "#8468b0",
  "#977256", "#d684bd", "#8a8a3c", "#50a8b8", "#b0b0b0",
];

/** Stable color per cluster id; singleton clusters render muted. */
export function clusterColor(clusterId: number, size: number): string {
  if (size <= 1) return "#d8d8d8";
  return PALETTE[clusterId % PALETTE.length];
}

/** Edge stroke width from probability ("thin links" for low p). */
export function edgeWidth(p: number): number {
  return 0.5 + 3.0 * p * p;
}

export const EDGE_DISPLAY_FLOOR = 0.1;
