// Pointer -> obstacle intent, throttled to one message per animation
// frame.  The pointer can move many times between frames; only the
// newest position survives, because the server treats commands as
// positional intent (latest wins), not as a trajectory.

import { obstacleCmd, type ObstacleCmd } from "./protocol.js";
import type { Pt } from "./view.js";

export class DragSender {
  private obstacleId: string | null = null;
  private pending: Pt | null = null;
  private heightZ = 0;

  /** Drag height for spatial scenarios; carried on every command. */
  setHeight(z: number): void {
    this.heightZ = z;
  }

  get height(): number {
    return this.heightZ;
  }

  begin(obstacleId: string, world: Pt): void {
    this.obstacleId = obstacleId;
    this.pending = world;
  }

  move(world: Pt): void {
    if (this.obstacleId === null) return;
    this.pending = world;
  }

  end(): void {
    this.obstacleId = null;
    this.pending = null;
  }

  get dragging(): boolean {
    return this.obstacleId !== null;
  }

  /**
   * Called once per animation frame: the newest intent since the last
   * flush, or null when the pointer was idle.
   */
  flush(): ObstacleCmd | null {
    if (this.obstacleId === null || this.pending === null) return null;
    const cmd = obstacleCmd(this.obstacleId, this.pending.x, this.pending.y, this.heightZ);
    this.pending = null;
    return cmd;
  }
}
