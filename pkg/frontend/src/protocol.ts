// Message vocabulary shared with the play service. The server is the source
// of truth for layout and debounce; the client only renders what it is told.

export interface DrumInfo {
  id: number;
  center: [number, number]; // meters, surface coordinates
  radius: number;
  fundamental_hz: number;
}

export interface Layout {
  surface: { width: number; height: number };
  drums: DrumInfo[];
}

export interface LatencyInfo {
  comm_ms: number;
  localization_ms: number;
  total_ms: number;
}

export interface FiredMessage {
  type: "fired";
  t: number;
  seq: number;
  drum: number;
  level: number;
  amplitude: number;
  pan: [number, number];
  latency: LatencyInfo;
  t_fire: number;
}

export interface DroppedMessage {
  type: "dropped";
  reason: string;
  t: number;
}

export interface LayoutMessage extends Layout {
  type: "layout";
}

export interface CueMessage {
  type: "cue";
  beat: number;
  drum: number;
  t_beat_s: number;
  t_cue_s: number;
}

export interface MetricsMessage {
  type: "metrics";
  fired: number;
  dropped: Record<string, number>;
  latency_ms: unknown;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage =
  | LayoutMessage
  | FiredMessage
  | DroppedMessage
  | CueMessage
  | MetricsMessage
  | ErrorMessage;

export interface TapMessage {
  type: "tap";
  t: number; // client-monotone microseconds
  x: number;
  y: number;
  pressure: number;
}

export interface MoveMessage {
  type: "move";
  t: number;
  x: number;
  y: number;
}

export interface CompositionMessage {
  type: "composition";
  beats: [number, number][]; // (beat time seconds, drum id)
  lead_ms: number;
}

export type ClientMessage = TapMessage | MoveMessage | CompositionMessage;

const SERVER_TYPES = new Set(["layout", "fired", "dropped", "cue", "metrics", "error"]);

export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return obj as ServerMessage;
}

export function tapMessage(x: number, y: number, pressure: number): TapMessage {
  return { type: "tap", t: nowMicros(), x, y, pressure };
}

export function moveMessage(x: number, y: number): MoveMessage {
  return { type: "move", t: nowMicros(), x, y };
}

export function nowMicros(): number {
  const clock =
    typeof performance !== "undefined" ? performance.now() : Date.now();
  return Math.round(clock * 1000);
}
