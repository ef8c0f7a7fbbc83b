// Canvas rendering of a derived scene. Pure consumer: world coordinates in,
// pixels out, fixed top-down camera framing both approach legs.

import { Scene, Shape } from "./view.js";

export interface Camera {
  originX: number;  // world coords of the canvas center
  originY: number;
  scale: number;    // pixels per meter
  width: number;
  height: number;
}

export function defaultCamera(width: number, height: number): Camera {
  return { originX: 2.0, originY: -20.0, scale: Math.min(width, height) / 150, width, height };
}

export function toPixel(cam: Camera, x: number, y: number): [number, number] {
  return [
    cam.width / 2 + (x - cam.originX) * cam.scale,
    cam.height / 2 - (y - cam.originY) * cam.scale,
  ];
}

const COLORS: Record<string, string> = {
  road: "#3b3f46",
  conflict: "rgba(255, 170, 0, 0.25)",
  blind_zone: "rgba(200, 40, 40, 0.30)",
  truck: "#d9822b",
  car: "#3a86ff",
  marker: "rgba(255,255,255,0.35)",
};

export function drawScene(ctx: CanvasRenderingContext2D, cam: Camera, scene: Scene): void {
  ctx.clearRect(0, 0, cam.width, cam.height);
  ctx.fillStyle = "#1c1f24";
  ctx.fillRect(0, 0, cam.width, cam.height);
  for (const shape of scene.shapes) {
    drawShape(ctx, cam, shape);
  }
  drawMarkers(ctx, cam);
}

function drawShape(ctx: CanvasRenderingContext2D, cam: Camera, shape: Shape): void {
  if (shape.kind === "lane") {
    ctx.fillStyle = COLORS.road;
    if (shape.orientation === "horizontal") {
      const [, top] = toPixel(cam, 0, shape.center + shape.width / 2);
      const [, bottom] = toPixel(cam, 0, shape.center - shape.width / 2);
      ctx.fillRect(0, top, cam.width, bottom - top);
    } else {
      const [left] = toPixel(cam, shape.center - shape.width / 2, 0);
      const [right] = toPixel(cam, shape.center + shape.width / 2, 0);
      ctx.fillRect(left, 0, right - left, cam.height);
    }
    return;
  }
  if (shape.kind === "poly") {
    ctx.fillStyle = COLORS[shape.role];
    ctx.beginPath();
    shape.points.forEach(([x, y], i) => {
      const [px, py] = toPixel(cam, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fill();
    return;
  }
  const [left, top] = toPixel(cam, shape.x - shape.w / 2, shape.y + shape.h / 2);
  const w = shape.w * cam.scale;
  const h = shape.h * cam.scale;
  ctx.fillStyle = COLORS[shape.role];
  ctx.fillRect(left, top, w, h);
  if (shape.role === "truck" || shape.role === "car") {
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1;
    ctx.strokeRect(left, top, w, h);
  }
}

function drawMarkers(ctx: CanvasRenderingContext2D, cam: Camera): void {
  // Protocol distance markers on the truck's approach leg.
  ctx.fillStyle = COLORS.marker;
  ctx.font = "10px sans-serif";
  for (const d of [120, 100]) {
    const [px, py] = toPixel(cam, -d, -1.75);
    ctx.fillRect(px, py - 8, 2, 16);
    ctx.fillText(`${d} m`, px - 10, py + 24);
  }
}
