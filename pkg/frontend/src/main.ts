/** Browser bootstrap: connect, wire inputs, draw on animation frames. */

import { Client, serverUrlFromLocation } from "./client.js";
import { dropLinkAction, resetAction, seedAction, strategyAction } from "./controls.js";
import { InputMapper } from "./input.js";
import { computeDrawModel, render } from "./render.js";
import { ViewModel } from "./viewmodel.js";

const COMMAND_RATE_HZ = 30; // never faster than the server tick rate

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("board");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");

  const vm = new ViewModel();
  const client = new Client(vm, serverUrlFromLocation(window.location.search));
  const input = new InputMapper(vm);
  client.connect();

  canvas.addEventListener("pointermove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    input.onPointerMove(ev.clientX - rect.left, ev.clientY - rect.top);
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    input.onWheel(ev.deltaY);
  });
  window.addEventListener("keydown", (ev) => {
    if (ev.key === " ") {
      ev.preventDefault();
      input.toggleJaw();
    }
  });

  byId<HTMLSelectElement>("strategy").addEventListener("change", (ev) => {
    strategyAction(client, (ev.target as HTMLSelectElement).value);
  });
  byId<HTMLButtonElement>("reset").addEventListener("click", () => resetAction(client));
  byId<HTMLButtonElement>("drop-link").addEventListener("click", () => {
    const seconds = Number.parseFloat(byId<HTMLInputElement>("outage-seconds").value);
    dropLinkAction(client, Number.isFinite(seconds) ? seconds : undefined);
  });
  byId<HTMLButtonElement>("apply-seed").addEventListener("click", () => {
    seedAction(client, byId<HTMLInputElement>("seed").value);
  });

  window.setInterval(() => {
    const message = input.buildCommand(canvas.width, canvas.height);
    if (message !== null) client.send(message);
  }, 1000 / COMMAND_RATE_HZ);

  let highWater = 1;
  const statusEl = byId<HTMLDivElement>("status");
  const frame = (): void => {
    if (vm.frame) {
      if (vm.frame.buffer_depth > highWater) highWater = vm.frame.buffer_depth;
      render(ctx, computeDrawModel(vm.frame, canvas, highWater), canvas);
    }
    const bits = [`connection: ${vm.connection}`];
    if (vm.connection === "closed") bits.push("reload to reconnect");
    if (vm.taskDone) bits.push("task done");
    if (vm.lastError) bits.push(`error: ${vm.lastError}`);
    statusEl.textContent = bits.join(" | ");
    window.requestAnimationFrame(frame);
  };
  window.requestAnimationFrame(frame);
}

main();
