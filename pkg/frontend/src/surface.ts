// Canvas rendering of the projected instrument plus pointer capture.
// The layout always comes from the server; nothing here invents geometry.

import { CueTracker } from "./cues.js";
import { FiredMessage, Layout } from "./protocol.js";
import { SurfaceTransform } from "./transform.js";

interface Pulse {
  drum: number;
  amplitude: number;
  startedAt: number;
}

interface MissFlash {
  x: number;
  y: number;
  startedAt: number;
}

const PULSE_S = 0.35;
const FLASH_S = 0.25;

export class SurfaceView {
  private layout: Layout | null = null;
  private transform: SurfaceTransform | null = null;
  private pulses: Pulse[] = [];
  private flashes: MissFlash[] = [];
  readonly cues = new CueTracker();
  connected = false;

  constructor(private readonly canvas: HTMLCanvasElement) {}

  setLayout(layout: Layout): void {
    this.layout = layout;
    this.resize();
  }

  resize(): void {
    if (!this.layout) return;
    this.transform = new SurfaceTransform(
      this.layout.surface.width,
      this.layout.surface.height,
      this.canvas.width,
      this.canvas.height,
    );
  }

  toSurface(px: number, py: number): [number, number] | null {
    return this.transform ? this.transform.toSurface(px, py) : null;
  }

  pulse(msg: FiredMessage, nowS: number): void {
    this.pulses.push({ drum: msg.drum, amplitude: msg.amplitude, startedAt: nowS });
  }

  flashMiss(x: number, y: number, nowS: number): void {
    this.flashes.push({ x, y, startedAt: nowS });
  }

  draw(nowS: number, hudLines: string[]): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.layout || !this.transform) {
      ctx.fillStyle = "#8899aa";
      ctx.font = "16px system-ui";
      ctx.fillText("waiting for layout...", 20, 30);
      return;
    }
    const tf = this.transform;

    // Surface bounds
    const [sx, sy] = tf.toCanvas(0, 0);
    ctx.strokeStyle = "#2c3a47";
    ctx.lineWidth = 2;
    ctx.strokeRect(sx, sy, this.layout.surface.width * tf.scale, this.layout.surface.height * tf.scale);

    this.pulses = this.pulses.filter((p) => nowS - p.startedAt < PULSE_S);
    this.flashes = this.flashes.filter((f) => nowS - f.startedAt < FLASH_S);
    const cueDrums = this.cues.activeDrums(nowS);

    for (const drum of this.layout.drums) {
      const [cx, cy] = tf.toCanvas(drum.center[0], drum.center[1]);
      const r = drum.radius * tf.scale;

      ctx.beginPath();
      ctx.arc(cx, cy, r, 0, Math.PI * 2);
      ctx.fillStyle = cueDrums.has(drum.id) ? "#3d5a2e" : "#22303c";
      ctx.fill();
      ctx.strokeStyle = cueDrums.has(drum.id) ? "#9be56a" : "#54a0ff";
      ctx.lineWidth = cueDrums.has(drum.id) ? 4 : 2;
      ctx.stroke();

      for (const p of this.pulses) {
        if (p.drum !== drum.id) continue;
        const age = (nowS - p.startedAt) / PULSE_S;
        ctx.beginPath();
        ctx.arc(cx, cy, r * (1 + 0.25 * age), 0, Math.PI * 2);
        // Brightness proportional to amplitude, fading with age.
        ctx.strokeStyle = `rgba(255, 214, 102, ${p.amplitude * (1 - age)})`;
        ctx.lineWidth = 6 * p.amplitude;
        ctx.stroke();
      }

      ctx.fillStyle = "#d8e6f0";
      ctx.font = `${Math.max(12, r / 4)}px system-ui`;
      ctx.textAlign = "center";
      ctx.fillText(String(drum.id), cx, cy + 4);
    }

    for (const f of this.flashes) {
      const [fx, fy] = tf.toCanvas(f.x, f.y);
      const age = (nowS - f.startedAt) / FLASH_S;
      ctx.beginPath();
      ctx.arc(fx, fy, 14 * (1 + age), 0, Math.PI * 2);
      ctx.strokeStyle = `rgba(255, 99, 99, ${1 - age})`;
      ctx.lineWidth = 3;
      ctx.stroke();
    }

    // HUD
    ctx.textAlign = "left";
    ctx.font = "14px ui-monospace, monospace";
    ctx.fillStyle = this.connected ? "#9be56a" : "#ff6363";
    ctx.fillText(this.connected ? "online" : "offline (taps queued)", 16, 24);
    ctx.fillStyle = "#d8e6f0";
    hudLines.forEach((line, i) => ctx.fillText(line, 16, 46 + i * 18));
  }
}
