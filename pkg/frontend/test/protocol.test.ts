import { describe, expect, it } from "vitest";
import { moveMessage, parseServerMessage, tapMessage } from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("accepts known message types", () => {
    const fired = parseServerMessage(
      JSON.stringify({
        type: "fired",
        t: 1,
        seq: 0,
        drum: 2,
        level: 4,
        amplitude: 1.0,
        pan: [0.7, 0.7],
        latency: { comm_ms: 100, localization_ms: 0, total_ms: 100 },
        t_fire: 101,
      }),
    );
    expect(fired?.type).toBe("fired");
    const dropped = parseServerMessage('{"type":"dropped","reason":"debounce","t":5}');
    expect(dropped).toEqual({ type: "dropped", reason: "debounce", t: 5 });
  });

  it("rejects junk without throwing", () => {
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage('"string"')).toBeNull();
    expect(parseServerMessage('{"type":"quack"}')).toBeNull();
    expect(parseServerMessage("null")).toBeNull();
  });
});

describe("client message builders", () => {
  it("stamps microsecond timestamps that do not run backwards", () => {
    const a = tapMessage(0.6, 0.4, 1.0);
    const b = moveMessage(0.5, 0.4);
    expect(b.t).toBeGreaterThanOrEqual(a.t);
    expect(Number.isInteger(a.t)).toBe(true);
  });

  it("carries pointer pressure through", () => {
    expect(tapMessage(0.1, 0.2, 0.35).pressure).toBe(0.35);
  });
});
