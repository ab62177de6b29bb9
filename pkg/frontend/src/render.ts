// Canvas scene, drawn fresh from the latest frame every animation
// frame.  Pure function of (view model, viewport, options): no
// internal state, so any frame log replays to the same pixels.

import type { StateFrame } from "./protocol.js";
import type { ViewModel } from "./viewModel.js";
import type { Viewport } from "./view.js";

// The slice of CanvasRenderingContext2D the scene needs; tests hand in
// a recording stub instead of a real context.
export interface Scene2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
  textBaseline: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export interface RenderOptions {
  /** Protective distance drawn around each obstacle; not on the wire. */
  dProtective: number;
  /** Drag height, echoed on the HUD for spatial scenarios. */
  heightZ: number;
}

const COLORS = {
  bg: "#101418",
  grid: "#1d242b",
  trail: "#3b82c4",
  trailAhead: "#28506e",
  link: "#9fb4c7",
  sphere: "#d8e4ee",
  sphereEdge: "#5b7286",
  obstacle: "#e0a93c",
  ring: "#b4552d",
  stop: "#e0573c",
  safe: "#35c26a",
  violation: "#e23b3b",
  text: "#c9d4dd",
  gaugeBack: "#232b33",
};

export function render(ctx: Scene2D, vm: ViewModel, vp: Viewport, opts: RenderOptions): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = COLORS.bg;
  ctx.fillRect(0, 0, vp.width, vp.height);
  const f = vm.frame;
  if (f === null) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText("waiting for first frame", vp.width / 2, vp.height / 2);
    return;
  }
  vp.fit(f);
  drawTrail(ctx, vm, vp, f);
  drawObstacles(ctx, vp, f, opts.dProtective);
  drawArm(ctx, vp, f);
  drawVelocityBar(ctx, vm, vp, f);
  drawPsiGauge(ctx, vp, f);
  drawBadge(ctx, vp, f);
  drawHud(ctx, vm, f, opts);
}

function drawTrail(ctx: Scene2D, vm: ViewModel, vp: Viewport, f: StateFrame): void {
  if (vm.trail.length > 1) {
    ctx.strokeStyle = COLORS.trail;
    ctx.lineWidth = 2;
    ctx.setLineDash([]);
    ctx.beginPath();
    const first = vp.toCanvas(vm.trail[0]);
    ctx.moveTo(first.x, first.y);
    for (let i = 1; i < vm.trail.length; i++) {
      const p = vp.toCanvas(vm.trail[i]);
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  }
  // Stop marker: on the trace when that stage has been visited, else
  // pinned to the newest point with a dashed "ahead" ring.
  if (vm.trail.length === 0) return;
  let mark = vm.trail[vm.trail.length - 1];
  let visited = false;
  for (const p of vm.trail) {
    if (p.stage >= f.j_stop) {
      mark = p;
      visited = p.stage === f.j_stop;
      break;
    }
  }
  const c = vp.toCanvas(mark);
  ctx.strokeStyle = COLORS.stop;
  ctx.lineWidth = 2;
  ctx.setLineDash(visited ? [] : [4, 4]);
  ctx.beginPath();
  ctx.arc(c.x, c.y, 7, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = COLORS.stop;
  ctx.font = "11px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "bottom";
  ctx.fillText(`stop @ ${f.j_stop}`, c.x + 9, c.y - 4);
}

function drawArm(ctx: Scene2D, vp: Viewport, f: StateFrame): void {
  if (f.spheres.length > 1) {
    ctx.strokeStyle = COLORS.link;
    ctx.lineWidth = 3;
    ctx.setLineDash([]);
    ctx.beginPath();
    const base = vp.toCanvas(f.spheres[0]);
    ctx.moveTo(base.x, base.y);
    for (let i = 1; i < f.spheres.length; i++) {
      const p = vp.toCanvas(f.spheres[i]);
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  }
  for (const sp of f.spheres) {
    const c = vp.toCanvas(sp);
    ctx.beginPath();
    ctx.arc(c.x, c.y, Math.max(sp.r * vp.scale, 3), 0, 2 * Math.PI);
    ctx.fillStyle = COLORS.sphere;
    ctx.fill();
    ctx.strokeStyle = COLORS.sphereEdge;
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

function drawObstacles(ctx: Scene2D, vp: Viewport, f: StateFrame, dProt: number): void {
  for (const ob of f.obstacles) {
    const c = vp.toCanvas(ob);
    // protective ring first, disc on top
    ctx.beginPath();
    ctx.arc(c.x, c.y, Math.max((ob.r + dProt) * vp.scale, 4), 0, 2 * Math.PI);
    ctx.strokeStyle = COLORS.ring;
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.beginPath();
    ctx.arc(c.x, c.y, Math.max(ob.r * vp.scale, 3), 0, 2 * Math.PI);
    ctx.fillStyle = COLORS.obstacle;
    ctx.fill();
    ctx.fillStyle = COLORS.text;
    ctx.font = "11px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "top";
    ctx.fillText(ob.id, c.x, c.y + Math.max(ob.r * vp.scale, 3) + 3);
  }
}

function drawVelocityBar(ctx: Scene2D, vm: ViewModel, vp: Viewport, f: StateFrame): void {
  const w = 160;
  const h = 10;
  const x = 16;
  const y = vp.height - 28;
  ctx.fillStyle = COLORS.gaugeBack;
  ctx.fillRect(x, y, w, h);
  const fill = Math.min(Math.abs(f.sdot) / vm.sdotScale, 1);
  ctx.fillStyle = COLORS.trail;
  ctx.fillRect(x, y, w * fill, h);
  ctx.strokeStyle = COLORS.sphereEdge;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "bottom";
  ctx.fillText(`path speed ${f.sdot.toFixed(3)}`, x, y - 3);
}

function drawPsiGauge(ctx: Scene2D, vp: Viewport, f: StateFrame): void {
  const w = 160;
  const h = 10;
  const x = 16;
  const y = vp.height - 52;
  const cap = 2.0; // seconds of warning shown full scale
  ctx.fillStyle = COLORS.gaugeBack;
  ctx.fillRect(x, y, w, h);
  const psi = f.psi_min;
  const frac = psi === null ? 1 : Math.max(Math.min(psi / cap, 1), 0);
  ctx.fillStyle = psi !== null && psi < 0.25 ? COLORS.violation : COLORS.safe;
  ctx.fillRect(x, y, w * frac, h);
  ctx.strokeStyle = COLORS.sphereEdge;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "bottom";
  const label = psi === null ? "clear" : `${psi.toFixed(2)} s`;
  ctx.fillText(`time to reach ${label}`, x, y - 3);
}

function drawBadge(ctx: Scene2D, vp: Viewport, f: StateFrame): void {
  if (f.contact === "none") return;
  const safe = f.contact === "safe";
  const text = safe ? "SAFE CONTACT" : "VIOLATION";
  const w = 150;
  const h = 30;
  const x = vp.width / 2 - w / 2;
  const y = 14;
  ctx.fillStyle = safe ? COLORS.safe : COLORS.violation;
  ctx.fillRect(x, y, w, h);
  ctx.fillStyle = "#06140b";
  ctx.font = "bold 14px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(text, vp.width / 2, y + h / 2);
}

function drawHud(ctx: Scene2D, vm: ViewModel, f: StateFrame, opts: RenderOptions): void {
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  const md = f.min_dist === null ? "-" : f.min_dist.toFixed(3);
  const lines = [
    `t ${vm.episodeTime.toFixed(2)} s   stage ${f.stage}   s ${f.s.toFixed(3)}`,
    `min dist ${md} m   drag z ${opts.heightZ.toFixed(2)}`,
    `violations ${vm.violations}`,
  ];
  for (let i = 0; i < lines.length; i++) {
    ctx.fillText(lines[i], 16, 14 + 16 * i);
  }
  if (vm.summary !== null) {
    const sm = vm.summary;
    const when = sm.arrival_time === null ? "" : ` in ${sm.arrival_time.toFixed(2)} s`;
    ctx.fillText(
      sm.arrived ? `arrived${when}` : "episode over (goal not reached)",
      16,
      14 + 16 * lines.length,
    );
  }
}
