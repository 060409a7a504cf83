import { describe, expect, it } from "vitest";

import {
  commandMessage,
  injectOutageMessage,
  parseServerFrame,
  resetMessage,
  setSeedMessage,
  setStrategyMessage,
} from "../src/protocol.js";
import { stateFrame } from "./frames.js";

describe("parseServerFrame", () => {
  it("accepts a complete state frame", () => {
    const frame = parseServerFrame(JSON.stringify(stateFrame({ now: 1.5 })));
    expect(frame).not.toBeNull();
    expect(frame!.type).toBe("state");
    if (frame!.type === "state") expect(frame!.now).toBe(1.5);
  });

  it("rejects malformed JSON", () => {
    expect(parseServerFrame("{oops")).toBeNull();
  });

  it("rejects frames without a type", () => {
    expect(parseServerFrame(JSON.stringify({ now: 0 }))).toBeNull();
  });

  it("rejects incomplete state frames", () => {
    const broken = { ...stateFrame(), remote: undefined };
    expect(parseServerFrame(JSON.stringify(broken))).toBeNull();
    const badMode = stateFrame() as unknown as { mode: string };
    badMode.mode = "warp";
    expect(parseServerFrame(JSON.stringify(badMode))).toBeNull();
  });

  it("accepts events and errors", () => {
    expect(parseServerFrame(JSON.stringify({ type: "event", name: "grasp" }))!.type).toBe("event");
    expect(parseServerFrame(JSON.stringify({ type: "error", message: "nope" }))!.type).toBe("error");
  });
});

describe("client message builders", () => {
  it("command carries pose and jaw", () => {
    const msg = JSON.parse(commandMessage({ x: 1, y: 2, z: 3 }, 0.5));
    expect(msg.type).toBe("command");
    expect(msg.pose.position).toEqual({ x: 1, y: 2, z: 3 });
    expect(msg.jaw).toBe(0.5);
  });

  it("control messages match the wire protocol", () => {
    expect(JSON.parse(setStrategyMessage("baseline"))).toEqual({ type: "set_strategy", value: "baseline" });
    expect(JSON.parse(resetMessage())).toEqual({ type: "reset" });
    expect(JSON.parse(injectOutageMessage(0.8))).toEqual({ type: "inject_outage", duration: 0.8 });
    expect(JSON.parse(setSeedMessage(7))).toEqual({ type: "set_seed", value: 7 });
  });
});
