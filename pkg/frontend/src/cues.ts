// Composition cue overlay state. The server emits each cue ahead of its
// beat; the client keeps the target pad highlighted until the beat has
// passed (plus a short grace so fast beats stay readable).

import type { CueMessage } from "./protocol.js";

const GRACE_S = 0.2;

interface ActiveCue {
  drum: number;
  beat: number;
  expiresAt: number; // seconds on the local clock
}

export class CueTracker {
  private active: ActiveCue[] = [];

  add(cue: CueMessage, nowS: number): void {
    const holdS = Math.max(cue.t_beat_s - cue.t_cue_s, 0) + GRACE_S;
    this.active.push({ drum: cue.drum, beat: cue.beat, expiresAt: nowS + holdS });
  }

  /** Drum ids that should glow at the given local time. */
  activeDrums(nowS: number): Set<number> {
    this.active = this.active.filter((c) => c.expiresAt > nowS);
    return new Set(this.active.map((c) => c.drum));
  }

  get pending(): number {
    return this.active.length;
  }
}
