/**
 * App wiring: one websocket channel in, one coalesced input stream out,
 * stateless re-render per tick.  Device vibration is requested opportunistically
 * where the browser exposes navigator.vibrate; the on-screen indicator is the
 * portable fallback.
 */
import {
  BindingState,
  initialBinding,
  InputCoalescer,
  mapPointer,
  sampleInput,
} from "./input.js";
import { Channel } from "./net.js";
import { applyServer, initialView, setConnection, setFinger, setMode, ViewState } from "./state.js";
import { render } from "./render.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app element");

let view: ViewState = initialView;
const binding: BindingState = initialBinding();
const coalescer = new InputCoalescer();

function repaint(): void {
  render(view, root as HTMLElement);
}

const wsUrl =
  (location.protocol === "https:" ? "wss://" : "ws://") + location.host + "/ws";

const channel = new Channel(wsUrl, {
  onMessage(msg) {
    view = applyServer(view, msg);
    if (msg.type === "tick") {
      coalescer.onTick(msg.frame_id);
      if (msg.vibration && typeof navigator.vibrate === "function") {
        navigator.vibrate(60);
      }
    }
    repaint();
  },
  onStatus(status) {
    view = setConnection(view, status);
    if (status !== "connected") coalescer.reset();
    repaint();
  },
});

// -- keyboard ----------------------------------------------------------------

window.addEventListener("keydown", (e) => {
  if (e.code === "KeyB") {
    view = setMode(view, view.mode === "blind" ? "debug" : "blind");
    repaint();
    return;
  }
  if (e.code === "KeyS") {
    binding.manualSweep = !binding.manualSweep;
    return;
  }
  binding.held.add(e.code);
  if (e.code.startsWith("Arrow")) e.preventDefault();
});
window.addEventListener("keyup", (e) => binding.held.delete(e.code));

// -- pointer over the touch surface (delegated: the DOM is rebuilt per tick) --

function surfaceAt(e: PointerEvent): HTMLElement | null {
  const target = e.target as HTMLElement | null;
  return target?.closest?.("#touch-surface") ?? null;
}

window.addEventListener("pointermove", (e) => {
  const surface = surfaceAt(e);
  if (surface === null) return;
  const touch = mapPointer(surface.getBoundingClientRect(), e.clientX, e.clientY);
  binding.pointer = touch;
  view = setFinger(view, touch);
  if (binding.manualSweep && e.buttons > 0) {
    const rect = surface.getBoundingClientRect();
    const frac = (e.clientX - rect.left) / rect.width; // 0..1 across the screen
    binding.sweepDrag = (frac - 0.5) * 2 * 1.22;
  }
});
window.addEventListener("pointerleave", () => {
  binding.pointer = null;
  view = setFinger(view, null);
});

// -- debug-panel controls (delegated) -----------------------------------------

window.addEventListener("change", (e) => {
  const target = e.target as HTMLSelectElement | null;
  if (target?.id === "destination" && target.value !== "") {
    channel.send({ type: "set_destination", node: Number(target.value) });
  }
});
window.addEventListener("click", (e) => {
  const target = (e.target as HTMLElement | null)?.closest?.("button");
  if (!target) return;
  if (target.id === "mode-toggle") {
    view = setMode(view, view.mode === "blind" ? "debug" : "blind");
    repaint();
  } else if (target.id === "sweep-toggle") {
    binding.manualSweep = !binding.manualSweep;
  } else if (target.classList.contains("edge-toggle")) {
    const edge = Number(target.dataset.edge);
    const enabled = target.dataset.enabled === "true";
    channel.send({
      type: "admin_patch",
      ops: [{ op: "set_edge_enabled", edge, enabled: !enabled }],
    });
  }
});

// -- input loop: sampled per animation frame, coalesced to one per tick --------

function frameLoop(): void {
  if (view.connection === "connected" && coalescer.takeSendSlot()) {
    channel.send(sampleInput(binding));
  }
  requestAnimationFrame(frameLoop);
}

repaint();
channel.connect();
requestAnimationFrame(frameLoop);
