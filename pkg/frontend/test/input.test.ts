import { describe, expect, it } from "vitest";

import { dropLinkAction, resetAction, seedAction, strategyAction } from "../src/controls.js";
import { InputMapper, JAW_CLOSED_VALUE, JAW_OPEN_VALUE, MAX_DEPTH, MIN_DEPTH } from "../src/input.js";
import { ViewModel } from "../src/viewmodel.js";

function openVm(): ViewModel {
  const vm = new ViewModel();
  vm.connection = "open";
  return vm;
}

describe("InputMapper", () => {
  it("maps the canvas center to the board origin", () => {
    const input = new InputMapper(openVm());
    const target = input.pointerToBoard(360, 240, 720, 480);
    expect(target.x).toBeCloseTo(0, 9);
    expect(target.y).toBeCloseTo(0, 9);
  });

  it("applies the configured scale with y up", () => {
    const vm = openVm();
    vm.input.scale = 0.001;
    const input = new InputMapper(vm);
    const target = input.pointerToBoard(460, 140, 720, 480);
    expect(target.x).toBeCloseTo(0.1, 9);
    expect(target.y).toBeCloseTo(0.1, 9);
  });

  it("repeated commands from a still pointer are identical", () => {
    const input = new InputMapper(openVm());
    input.onPointerMove(400, 200);
    const a = input.buildCommand(720, 480);
    const b = input.buildCommand(720, 480);
    expect(a).not.toBeNull();
    expect(a).toBe(b);
  });

  it("suppresses input while disconnected", () => {
    const vm = new ViewModel();
    vm.connection = "closed";
    const input = new InputMapper(vm);
    input.onPointerMove(10, 10);
    expect(input.buildCommand(720, 480)).toBeNull();
  });

  it("wheel clamps depth and jaw toggles", () => {
    const vm = openVm();
    const input = new InputMapper(vm);
    for (let i = 0; i < 100; i++) input.onWheel(+120);
    expect(vm.input.depth).toBe(MIN_DEPTH);
    for (let i = 0; i < 100; i++) input.onWheel(-120);
    expect(vm.input.depth).toBe(MAX_DEPTH);

    input.onPointerMove(0, 0);
    expect(JSON.parse(input.buildCommand(720, 480)!).jaw).toBe(JAW_OPEN_VALUE);
    input.toggleJaw();
    expect(JSON.parse(input.buildCommand(720, 480)!).jaw).toBe(JAW_CLOSED_VALUE);
  });
});

describe("control panel actions", () => {
  it("sends protocol messages through the handler", () => {
    const sent: string[] = [];
    const handlers = { send: (m: string) => (sent.push(m), true) };
    expect(strategyAction(handlers, "baseline")).toBe(true);
    expect(resetAction(handlers)).toBe(true);
    expect(seedAction(handlers, "42")).toBe(true);
    expect(dropLinkAction(handlers)).toBe(true);
    expect(sent.map((m) => JSON.parse(m).type)).toEqual(["set_strategy", "reset", "set_seed", "inject_outage"]);
    expect(JSON.parse(sent[3]).duration).toBeCloseTo(0.8, 9);
  });

  it("rejects bad values without sending", () => {
    const handlers = { send: () => true };
    expect(strategyAction(handlers, "warp")).toBe(false);
    expect(seedAction(handlers, "not-a-number")).toBe(false);
    expect(dropLinkAction(handlers, -1)).toBe(false);
  });
});
