// Client-side session state: latest frame, violation counter, episode
// timer, the path trace reconstructed from visited stages.  Pure data,
// no DOM, no socket; the render pass reads it, the socket feeds it.

import type { ServerMsg, StateFrame, SummaryMsg } from "./protocol.js";

export interface TrailPoint {
  stage: number;
  x: number;
  y: number;
}

export class ViewModel {
  frame: StateFrame | null = null;
  summary: SummaryMsg | null = null;
  lastError: string | null = null;
  connected = false;

  /** Frames in this episode whose contact class is "violation". */
  violations = 0;

  /** Sim seconds since the episode began (t of the first frame seen). */
  episodeTime = 0;
  private episodeStart: number | null = null;

  /** Largest |sdot| seen, scales the velocity bar. */
  sdotScale = 1e-6;

  // One point per visited stage, tip sphere's planar position.  The
  // wire carries no path geometry, so the trace is what the robot has
  // actually shown us; the stop marker rides it.
  trail: TrailPoint[] = [];

  apply(msg: ServerMsg): void {
    if (msg.type === "error") {
      this.lastError = msg.message;
      return;
    }
    if (msg.type === "summary") {
      this.summary = msg;
      return;
    }
    if (this.episodeStart === null || msg.t < this.episodeTime + this.episodeStart) {
      // First frame, or t went backward: a reset started a new episode.
      // Everything episode-scoped clears, so the state is a function of
      // the frames seen since this boundary and a log replay starting
      // here reproduces it exactly.
      this.episodeStart = msg.t;
      this.trail = [];
      this.summary = null;
      this.violations = 0;
      this.sdotScale = 1e-6;
    }
    this.frame = msg;
    this.episodeTime = msg.t - this.episodeStart;
    if (msg.contact === "violation") this.violations += 1;
    const speed = Math.abs(msg.sdot);
    if (speed > this.sdotScale) this.sdotScale = speed;
    this.pushTrail(msg);
  }

  setConnected(up: boolean): void {
    this.connected = up;
  }

  private pushTrail(f: StateFrame): void {
    if (f.spheres.length === 0) return;
    const tip = f.spheres[f.spheres.length - 1];
    const last = this.trail[this.trail.length - 1];
    if (last !== undefined && last.stage === f.stage) {
      last.x = tip.x;
      last.y = tip.y;
    } else {
      this.trail.push({ stage: f.stage, x: tip.x, y: tip.y });
    }
  }
}
