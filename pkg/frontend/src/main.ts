// Bootstrap: read query parameters, connect to the service, wire pointer
// input, audio, cue overlay, and the latency HUD together.
//
// Query parameters:
//   ?server=host:port   service address (defaults to the page's host)
//   ?policy=adaptive    session policy, shown in the HUD
//   ?seed=123           deterministic session randomness

import { TonePlayer } from "./audio.js";
import { PlayClient } from "./client.js";
import { Layout, moveMessage, nowMicros, tapMessage } from "./protocol.js";
import { RollingStats } from "./stats.js";
import { SurfaceView } from "./surface.js";

const params = new URLSearchParams(location.search);
const server = params.get("server") ?? location.host;
const policy = params.get("policy") ?? "adaptive";
const seed = params.get("seed");

const httpBase = `${location.protocol === "https:" ? "https" : "http"}://${server}`;
const wsBase = `${location.protocol === "https:" ? "wss" : "ws"}://${server}`;
const wsUrl = `${wsBase}/play?policy=${policy}${seed ? `&seed=${seed}` : ""}`;

const canvas = document.getElementById("surface") as HTMLCanvasElement;
const view = new SurfaceView(canvas);
const tones = new TonePlayer();
const totals = new RollingStats(128);
let drumPitch = new Map<number, number>();
let fired = 0;
let dropped = 0;
let lastDropReason = "";

function nowSeconds(): number {
  return performance.now() / 1000;
}

const client = new PlayClient(wsUrl, {
  onMessage(msg) {
    switch (msg.type) {
      case "layout": {
        view.setLayout(msg as Layout);
        drumPitch = new Map(msg.drums.map((d) => [d.id, d.fundamental_hz]));
        break;
      }
      case "fired": {
        fired += 1;
        totals.push(msg.latency.total_ms);
        view.pulse(msg, nowSeconds());
        const pitch = drumPitch.get(msg.drum);
        if (pitch !== undefined) {
          tones.play(pitch, msg.amplitude, msg.pan);
        }
        break;
      }
      case "dropped": {
        dropped += 1;
        lastDropReason = msg.reason;
        if (lastPointer) view.flashMiss(lastPointer[0], lastPointer[1], nowSeconds());
        break;
      }
      case "cue": {
        view.cues.add(msg, nowSeconds());
        break;
      }
      case "error": {
        console.warn("server:", msg.message);
        break;
      }
      default:
        break; // metrics handled via HUD polling of local stats
    }
  },
  onStatus(connected) {
    view.connected = connected;
  },
});

let lastPointer: [number, number] | null = null;
let lastMoveSent = 0;

canvas.addEventListener("pointerdown", (ev) => {
  tones.unlock(); // audio contexts need a user gesture
  const pos = view.toSurface(ev.offsetX * devicePixelRatio, ev.offsetY * devicePixelRatio);
  if (!pos) return;
  lastPointer = pos;
  // Mice report a synthetic 0.5; only trust real pressure hardware.
  const pressure = ev.pointerType === "mouse" ? 1.0 : ev.pressure || 1.0;
  client.send(tapMessage(pos[0], pos[1], pressure));
});

canvas.addEventListener("pointermove", (ev) => {
  const t = nowMicros();
  if (t - lastMoveSent < 33_000) return; // ~30 Hz, matching the camera rate
  const pos = view.toSurface(ev.offsetX * devicePixelRatio, ev.offsetY * devicePixelRatio);
  if (!pos) return;
  lastMoveSent = t;
  client.send(moveMessage(pos[0], pos[1]));
});

const demoButton = document.getElementById("demo");
demoButton?.addEventListener("click", () => {
  tones.unlock();
  client.send({
    type: "composition",
    beats: [
      [0.5, 1], [1.0, 2], [1.5, 3], [2.0, 2],
      [2.5, 1], [3.0, 2], [3.5, 3], [4.0, 1],
    ],
    lead_ms: 500,
  });
});

function fitCanvas(): void {
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
  view.resize();
}
window.addEventListener("resize", fitCanvas);
fitCanvas();

function frame(): void {
  const hud = [
    `policy ${policy}   server ${server}`,
    `taps ${fired + dropped}   fired ${fired}   dropped ${dropped}` +
      (lastDropReason ? ` (last: ${lastDropReason})` : ""),
    totals.count
      ? `latency ms  last ${totals.last!.toFixed(1)}   mean ${totals.mean.toFixed(1)}` +
        `   p95 ${totals.percentile(95).toFixed(1)}`
      : "latency ms  (tap a pad)",
    tones.unlocked ? "" : "audio locked: tap once to enable",
  ].filter((line) => line.length > 0);
  view.draw(nowSeconds(), hud);
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);

// Fetch the layout over HTTP as well so the pads render even if the socket
// is slow to come up.
void fetch(`${httpBase}/layout`)
  .then((r) => r.json())
  .then((layout: Layout) => {
    view.setLayout(layout);
    drumPitch = new Map(layout.drums.map((d) => [d.id, d.fundamental_hz]));
  })
  .catch(() => undefined);
