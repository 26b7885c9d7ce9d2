/** Pair-inspection view: aligned clouds overlaid in a rotatable projection.
 *
 * Orthographic projection with mouse-drag rotation; the two clouds render
 * in contrasting colors so alignment (or its failure) is visible at a
 * glance. Points arrive already downsampled by the service.
 */

export interface CloudPair {
  source: number[][];
  target: number[][];
}

export class PairViewer {
  yaw = 0.6;
  pitch = 0.8;
  zoom = 1.0;

  constructor(private pair: CloudPair) {}

  setPair(pair: CloudPair): void {
    this.pair = pair;
  }

  rotateBy(dYaw: number, dPitch: number): void {
    this.yaw += dYaw;
    this.pitch = Math.max(-1.5, Math.min(1.5, this.pitch + dPitch));
  }

  project(points: number[][], width: number, height: number): Array<[number, number, number]> {
    const cy = Math.cos(this.yaw), sy = Math.sin(this.yaw);
    const cp = Math.cos(this.pitch), sp = Math.sin(this.pitch);
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    const rotated: Array<[number, number, number]> = points.map(([x, y, z]) => {
      const rx = cy * x + sy * y;
      const ry = -sy * cp * x + cy * cp * y + sp * z;
      const rz = sy * sp * x - cy * sp * y + cp * z;
      minX = Math.min(minX, rx);
      maxX = Math.max(maxX, rx);
      minY = Math.min(minY, ry);
      maxY = Math.max(maxY, ry);
      return [rx, ry, rz];
    });
    const span = Math.max(maxX - minX, maxY - minY, 1e-6);
    const scale = (this.zoom * Math.min(width, height) * 0.85) / span;
    const midX = (minX + maxX) / 2;
    const midY = (minY + maxY) / 2;
    return rotated.map(([x, y, z]) => [
      width / 2 + (x - midX) * scale,
      height / 2 - (y - midY) * scale,
      z,
    ]);
  }

  render(ctx: CanvasRenderingContext2D, width: number, height: number): void {
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#181c20";
    ctx.fillRect(0, 0, width, height);
    const all = [...this.pair.source, ...this.pair.target];
    if (all.length === 0) return;
    const projected = this.project(all, width, height);
    const nSource = this.pair.source.length;
    for (let i = 0; i < projected.length; i++) {
      const [x, y] = projected[i];
      ctx.fillStyle = i < nSource ? "rgba(120, 190, 255, 0.8)" : "rgba(255, 170, 90, 0.8)";
      ctx.fillRect(x, y, 1.6, 1.6);
    }
  }
}

/** Tiny sparkline of the 70-bin distance histogram. */
export function renderHistogram(
  ctx: CanvasRenderingContext2D,
  bins: number[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#f4f4f4";
  ctx.fillRect(0, 0, width, height);
  const peak = Math.max(...bins, 1e-9);
  const barWidth = width / bins.length;
  ctx.fillStyle = "#4878a8";
  bins.forEach((value, i) => {
    const h = (value / peak) * (height - 4);
    ctx.fillRect(i * barWidth, height - h, Math.max(1, barWidth - 1), h);
  });
}
