/**
 * Stick-figure rendering from world joint positions.
 *
 * Everything here draws from FK positions only — the renderer never sees
 * rotations or features, just (frame, joint, xyz) arrays from the service.
 */

export interface Bounds {
  min: [number, number, number];
  max: [number, number, number];
}

/** Parent→child index pairs to draw as bones (roots contribute nothing). */
export function boneSegments(parents: number[]): Array<[number, number]> {
  const segments: Array<[number, number]> = [];
  for (let j = 0; j < parents.length; j++) {
    if (parents[j] >= 0) segments.push([parents[j], j]);
  }
  return segments;
}

/** Axis-aligned bounds over every frame so the camera never jumps. */
export function worldBounds(frames: number[][][]): Bounds {
  const min: [number, number, number] = [Infinity, Infinity, Infinity];
  const max: [number, number, number] = [-Infinity, -Infinity, -Infinity];
  for (const frame of frames) {
    for (const p of frame) {
      for (let a = 0; a < 3; a++) {
        if (p[a] < min[a]) min[a] = p[a];
        if (p[a] > max[a]) max[a] = p[a];
      }
    }
  }
  if (!Number.isFinite(min[0])) return { min: [0, 0, 0], max: [1, 1, 1] };
  return { min, max };
}

export interface Camera {
  /** World-units-per-pixel scale and pixel offset of the world origin. */
  scale: number;
  offsetX: number;
  offsetY: number;
}

/**
 * Fit bounds into a canvas with a margin; the XY world plane maps to
 * screen with Y flipped (world up = screen up).
 */
export function fitCamera(bounds: Bounds, width: number, height: number, margin = 0.1): Camera {
  const spanX = Math.max(bounds.max[0] - bounds.min[0], 1e-6);
  const spanY = Math.max(bounds.max[1] - bounds.min[1], 1e-6);
  const usableW = width * (1 - 2 * margin);
  const usableH = height * (1 - 2 * margin);
  const scale = Math.min(usableW / spanX, usableH / spanY);
  const cx = (bounds.min[0] + bounds.max[0]) / 2;
  const cy = (bounds.min[1] + bounds.max[1]) / 2;
  return {
    scale,
    offsetX: width / 2 - cx * scale,
    offsetY: height / 2 + cy * scale,
  };
}

/** World → pixel. Orthographic onto the XY plane, Y up. */
export function project(camera: Camera, p: number[]): [number, number] {
  return [camera.offsetX + p[0] * camera.scale, camera.offsetY - p[1] * camera.scale];
}

export interface DrawStyle {
  bone: string;
  joint: string;
  jointRadius: number;
  highlight?: Map<number, string>;
}

/** Draw one frame of a skeleton onto a 2D canvas context. */
export function drawFrame(
  ctx: CanvasRenderingContext2D,
  positions: number[][],
  segments: Array<[number, number]>,
  camera: Camera,
  style: DrawStyle,
): void {
  ctx.strokeStyle = style.bone;
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (const [a, b] of segments) {
    const pa = project(camera, positions[a]);
    const pb = project(camera, positions[b]);
    ctx.moveTo(pa[0], pa[1]);
    ctx.lineTo(pb[0], pb[1]);
  }
  ctx.stroke();

  for (let j = 0; j < positions.length; j++) {
    const [x, y] = project(camera, positions[j]);
    const color = style.highlight?.get(j) ?? style.joint;
    const r = style.highlight?.has(j) ? style.jointRadius * 1.6 : style.jointRadius;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(x, y, r, 0, Math.PI * 2);
    ctx.fill();
  }
}

/** Joint index under the pointer, or -1 (used for click-to-bind). */
export function pickJoint(
  positions: number[][],
  camera: Camera,
  px: number,
  py: number,
  radius = 8,
): number {
  let best = -1;
  let bestD = radius * radius;
  for (let j = 0; j < positions.length; j++) {
    const [x, y] = project(camera, positions[j]);
    const d = (x - px) * (x - px) + (y - py) * (y - py);
    if (d <= bestD) {
      best = j;
      bestD = d;
    }
  }
  return best;
}
