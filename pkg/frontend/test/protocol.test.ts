import { describe, expect, it } from "vitest";

import { parseServerMessage } from "../src/protocol.js";
import { sampleDeployment, sampleTick } from "./fixtures.js";

describe("parseServerMessage", () => {
  it("accepts a well-formed tick", () => {
    const msg = parseServerMessage(JSON.stringify(sampleTick()));
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("tick");
    if (msg!.type === "tick") {
      expect(msg!.pose.x).toBe(2.0);
      expect(msg!.guidance?.next?.edge).toBe(0);
    }
  });

  it("accepts a tick with null guidance and empty events", () => {
    const msg = parseServerMessage(
      JSON.stringify(sampleTick({ guidance: null })),
    );
    expect(msg).not.toBeNull();
  });

  it("accepts a map message", () => {
    const msg = parseServerMessage(
      JSON.stringify({ type: "map", deployment: sampleDeployment() }),
    );
    expect(msg?.type).toBe("map");
  });

  it("accepts error, patch_ack, tick_ack and frame messages", () => {
    for (const doc of [
      { type: "error", error: "unknown edge" },
      { type: "patch_ack", version: 2 },
      { type: "tick_ack", destination: 1 },
      { type: "frame", frame_id: 3, png_base64: "aGk=" },
    ]) {
      expect(parseServerMessage(JSON.stringify(doc))).not.toBeNull();
    }
  });

  it("rejects non-JSON input", () => {
    expect(parseServerMessage("{nope")).toBeNull();
  });

  it("rejects unknown message types", () => {
    expect(parseServerMessage(JSON.stringify({ type: "bogus" }))).toBeNull();
  });

  it("rejects a tick missing the vibration field", () => {
    const tick = sampleTick() as Record<string, unknown>;
    delete tick.vibration;
    expect(parseServerMessage(JSON.stringify(tick))).toBeNull();
  });

  it("rejects a tick with a malformed pose", () => {
    const tick = sampleTick({
      pose: { x: 1, y: 2, heading: 0 } as never,
    });
    expect(parseServerMessage(JSON.stringify(tick))).toBeNull();
  });
});
