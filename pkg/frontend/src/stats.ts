// Rolling latency statistics for the HUD, fed from server-reported
// per-tap latency (never from client round-trip time).

export class RollingStats {
  private values: number[] = [];
  private total = 0;

  constructor(readonly window: number = 128) {}

  push(v: number): void {
    this.values.push(v);
    this.total += 1;
    if (this.values.length > this.window) this.values.shift();
  }

  get count(): number {
    return this.total;
  }

  get last(): number | null {
    return this.values.length ? this.values[this.values.length - 1] : null;
  }

  get mean(): number {
    if (!this.values.length) return 0;
    return this.values.reduce((a, b) => a + b, 0) / this.values.length;
  }

  percentile(p: number): number {
    if (!this.values.length) return 0;
    const sorted = [...this.values].sort((a, b) => a - b);
    const pos = (p / 100) * (sorted.length - 1);
    const lo = Math.floor(pos);
    const hi = Math.ceil(pos);
    const frac = pos - lo;
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
  }
}
