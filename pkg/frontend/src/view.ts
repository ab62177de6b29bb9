// World <-> canvas mapping.  Top-down planar projection (x right,
// y up); the viewport locks onto the first frame's extent so the scene
// does not breathe while the robot moves.  A frame whose clock runs
// backward marks a fresh episode and relocks the camera, which keeps
// the mapping a function of the frames seen since that boundary.

import type { StateFrame } from "./protocol.js";

export interface Pt {
  x: number;
  y: number;
}

export class Viewport {
  cx = 0;
  cy = 0;
  /** World units per half canvas (the smaller axis). */
  half = 2;
  width = 800;
  height = 600;
  private locked = false;
  private lastT = 0;

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  /** Fit to a frame once per episode; later frames keep the camera. */
  fit(frame: StateFrame): void {
    if (this.locked && frame.t < this.lastT) this.locked = false;
    this.lastT = frame.t;
    if (this.locked) return;
    const xs: number[] = [];
    const ys: number[] = [];
    for (const sp of frame.spheres) {
      xs.push(sp.x);
      ys.push(sp.y);
    }
    for (const ob of frame.obstacles) {
      xs.push(ob.x);
      ys.push(ob.y);
    }
    xs.push(0);
    ys.push(0);
    const lo = { x: Math.min(...xs), y: Math.min(...ys) };
    const hi = { x: Math.max(...xs), y: Math.max(...ys) };
    this.cx = 0.5 * (lo.x + hi.x);
    this.cy = 0.5 * (lo.y + hi.y);
    this.half = Math.max(hi.x - lo.x, hi.y - lo.y, 1.0) * 0.75 + 0.5;
    this.locked = true;
  }

  get scale(): number {
    return Math.min(this.width, this.height) / (2 * this.half);
  }

  toCanvas(p: Pt): Pt {
    return {
      x: this.width / 2 + (p.x - this.cx) * this.scale,
      y: this.height / 2 - (p.y - this.cy) * this.scale,
    };
  }

  toWorld(p: Pt): Pt {
    return {
      x: this.cx + (p.x - this.width / 2) / this.scale,
      y: this.cy - (p.y - this.height / 2) / this.scale,
    };
  }
}
