/** Control panel wiring: strategy select, reset, seed entry, link drop. */

import { injectOutageMessage, resetMessage, setSeedMessage, setStrategyMessage } from "./protocol.js";

export const DEFAULT_OUTAGE_SECONDS = 0.8;

export interface ControlPanelHandlers {
  send: (message: string) => boolean;
}

export function strategyAction(handlers: ControlPanelHandlers, value: string): boolean {
  if (value !== "baseline" && value !== "replay") return false;
  return handlers.send(setStrategyMessage(value));
}

export function resetAction(handlers: ControlPanelHandlers): boolean {
  return handlers.send(resetMessage());
}

export function seedAction(handlers: ControlPanelHandlers, text: string): boolean {
  const value = Number.parseInt(text, 10);
  if (!Number.isFinite(value)) return false;
  return handlers.send(setSeedMessage(value));
}

export function dropLinkAction(handlers: ControlPanelHandlers, seconds = DEFAULT_OUTAGE_SECONDS): boolean {
  if (!(seconds > 0)) return false;
  return handlers.send(injectOutageMessage(seconds));
}
