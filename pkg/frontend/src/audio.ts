// Drum voice built on the Web Audio API. Uses the same damped-modal recipe
// as the server's offline renderer (overtone ratios 1 / 1.59 / 2.14 with
// decay rates 8 / 12 / 16 per second) so live playback and replay WAVs
// sound alike.

export const MODE_RATIOS = [1.0, 1.59, 2.14];
export const MODE_DECAYS = [8.0, 12.0, 16.0];
export const MODE_WEIGHTS = [0.5, 0.3, 0.2];

export class TonePlayer {
  private ctx: AudioContext | null = null;
  available = true;

  /** Must be called from a user gesture before the first tone. */
  unlock(): void {
    if (!this.available) return;
    try {
      if (!this.ctx) {
        this.ctx = new AudioContext();
      }
      if (this.ctx.state === "suspended") {
        void this.ctx.resume();
      }
    } catch {
      this.available = false; // visual-only mode
    }
  }

  get unlocked(): boolean {
    return this.ctx !== null && this.ctx.state === "running";
  }

  play(
    fundamentalHz: number,
    amplitude: number,
    pan: [number, number],
    durationS = 0.6,
  ): boolean {
    if (!this.ctx || amplitude <= 0) return false;
    const ctx = this.ctx;
    const t0 = ctx.currentTime;
    const merger = ctx.createChannelMerger(2);
    const left = ctx.createGain();
    const right = ctx.createGain();
    left.gain.value = pan[0];
    right.gain.value = pan[1];
    left.connect(merger, 0, 0);
    right.connect(merger, 0, 1);
    merger.connect(ctx.destination);

    for (let i = 0; i < MODE_RATIOS.length; i++) {
      const osc = ctx.createOscillator();
      osc.type = "sine";
      osc.frequency.value = fundamentalHz * MODE_RATIOS[i];
      const env = ctx.createGain();
      env.gain.setValueAtTime(amplitude * MODE_WEIGHTS[i], t0);
      // setTargetAtTime's time constant is the reciprocal decay rate.
      env.gain.setTargetAtTime(0, t0, 1 / MODE_DECAYS[i]);
      osc.connect(env);
      env.connect(left);
      env.connect(right);
      osc.start(t0);
      osc.stop(t0 + durationS);
    }
    return true;
  }
}
