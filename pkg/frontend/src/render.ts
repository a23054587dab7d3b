/**
 * DOM rendering.  The tree is rebuilt from ViewState on every tick (10 Hz),
 * which keeps rendering stateless: nothing survives a reconnect except what
 * the next payload says.
 *
 * Blind-mode contract: the DOM carries no map, pose, or lane-geometry data —
 * only the touch surface, the vibration indicator, marker-scan notifications,
 * and connection/arrival banners.  The map, pose readout, destination picker
 * and admin panel are sighted-assistant affordances and exist only in debug
 * mode.
 */
import { PALETTE } from "./protocol.js";
import type { DeploymentDoc, TickMessage } from "./protocol.js";
import type { ViewState } from "./state.js";

const MAP_WIDTH_PX = 520;

function el(
  doc: Document,
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBanner(doc: Document, view: ViewState): HTMLElement | null {
  if (view.connection === "connected") return null;
  const text =
    view.connection === "connecting"
      ? "connecting…"
      : "connection lost — reconnecting, inputs disabled";
  return el(doc, "div", { id: "banner", "data-status": view.connection }, text);
}

function renderPhone(doc: Document, view: ViewState): HTMLElement {
  const phone = el(doc, "section", { id: "phone" });

  const surface = el(doc, "div", {
    id: "touch-surface",
    role: "application",
    "aria-label": "phone screen: touch to probe for the lane",
  });
  if (view.finger !== null) {
    // the user's own finger position; screen coordinates, not world data
    surface.appendChild(el(doc, "div", { id: "finger" }));
  }
  phone.appendChild(surface);

  phone.appendChild(
    el(
      doc,
      "div",
      {
        id: "vibration",
        "data-on": view.vibration ? "true" : "false",
        "aria-live": "off",
      },
      view.vibration ? "vibrating" : "still",
    ),
  );

  if (view.arrived) {
    phone.appendChild(
      el(doc, "div", { id: "arrival", role: "alert" }, "destination reached"),
    );
  }

  const notes = el(doc, "ul", { id: "notifications", "aria-live": "polite" });
  for (const n of view.notifications) notes.appendChild(el(doc, "li", {}, n));
  phone.appendChild(notes);

  if (view.lastError !== null) {
    phone.appendChild(el(doc, "div", { id: "error" }, view.lastError));
  }
  return phone;
}

function drawMap(
  canvas: HTMLCanvasElement,
  map: DeploymentDoc,
  tick: TickMessage | null,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return; // environments without canvas support
  const [xmin, ymin, xmax, ymax] = map.floor_bounds;
  const scale = MAP_WIDTH_PX / (xmax - xmin);
  const toPx = (x: number, y: number): [number, number] => [
    (x - xmin) * scale,
    canvas.height - (y - ymin) * scale,
  ];

  ctx.fillStyle = "#d8d8d8";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  for (const edge of map.edges) {
    const [leftColor, rightColor] = edge.color_pair;
    for (let i = 0; i + 1 < edge.polyline.length; i++) {
      const [ax, ay] = edge.polyline[i];
      const [bx, by] = edge.polyline[i + 1];
      const len = Math.hypot(bx - ax, by - ay) || 1;
      // offset the two strips perpendicular to the travel direction
      const nx = (-(by - ay) / len) * 0.075 * scale;
      const ny = ((bx - ax) / len) * 0.075 * scale;
      for (const [color, sign] of [
        [leftColor, 1],
        [rightColor, -1],
      ] as const) {
        ctx.strokeStyle = edge.enabled ? (PALETTE[color] ?? "#000") : "#888";
        ctx.lineWidth = edge.enabled ? 4 : 2;
        ctx.setLineDash(edge.enabled ? [] : [6, 6]);
        ctx.beginPath();
        const [au, av] = toPx(ax, ay);
        const [bu, bv] = toPx(bx, by);
        ctx.moveTo(au + sign * nx, av - sign * ny);
        ctx.lineTo(bu + sign * nx, bv - sign * ny);
        ctx.stroke();
      }
    }
  }
  ctx.setLineDash([]);

  ctx.fillStyle = "#222";
  ctx.font = "12px sans-serif";
  for (const node of map.nodes) {
    const [u, v] = toPx(node.position[0], node.position[1]);
    ctx.beginPath();
    ctx.arc(u, v, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(node.label ?? String(node.id), u + 8, v - 8);
  }

  if (tick !== null) {
    const { x, y, heading, sweep } = tick.pose;
    const [u, v] = toPx(x, y);
    ctx.strokeStyle = "#000";
    ctx.fillStyle = "#ff7700";
    ctx.beginPath();
    ctx.arc(u, v, 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.beginPath();
    ctx.moveTo(u, v);
    ctx.lineTo(u + 18 * Math.cos(heading), v - 18 * Math.sin(heading));
    ctx.stroke();
    ctx.strokeStyle = "#ff7700";
    ctx.beginPath();
    ctx.moveTo(u, v);
    const cam = heading + sweep;
    ctx.lineTo(u + 26 * Math.cos(cam), v - 26 * Math.sin(cam));
    ctx.stroke();

    const next = tick.guidance?.next;
    if (next != null) {
      const edge = map.edges.find((e) => e.id === next.edge);
      if (edge !== undefined) {
        const tail = next.direction === "forward" ? 0 : edge.polyline.length - 1;
        const head = next.direction === "forward" ? edge.polyline.length - 1 : 0;
        const [au, av] = toPx(edge.polyline[tail][0], edge.polyline[tail][1]);
        const [bu, bv] = toPx(edge.polyline[head][0], edge.polyline[head][1]);
        ctx.strokeStyle = "#ff00ff";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(au, av);
        ctx.lineTo(bu, bv);
        const ang = Math.atan2(av - bv, bu - au);
        ctx.moveTo(bu, bv);
        ctx.lineTo(bu - 10 * Math.cos(ang - 0.4), bv + 10 * Math.sin(ang - 0.4));
        ctx.moveTo(bu, bv);
        ctx.lineTo(bu - 10 * Math.cos(ang + 0.4), bv + 10 * Math.sin(ang + 0.4));
        ctx.stroke();
      }
    }
  }
}

function renderDebug(doc: Document, view: ViewState): HTMLElement {
  const panel = el(doc, "section", { id: "debug" });
  if (view.map !== null) {
    const [xmin, ymin, xmax, ymax] = view.map.floor_bounds;
    const canvas = el(doc, "canvas", {
      id: "map",
      width: String(MAP_WIDTH_PX),
      height: String(Math.round((MAP_WIDTH_PX * (ymax - ymin)) / (xmax - xmin))),
    }) as HTMLCanvasElement;
    drawMap(canvas, view.map, view.tick);
    panel.appendChild(canvas);
  }

  if (view.tick !== null) {
    const { x, y, heading } = view.tick.pose;
    panel.appendChild(
      el(
        doc,
        "div",
        { id: "pose-readout" },
        `t=${view.tick.t.toFixed(1)}s  pose=(${x.toFixed(2)}, ${y.toFixed(2)})` +
          `  heading=${((heading * 180) / Math.PI).toFixed(0)}°` +
          `  nav=${view.tick.mode}`,
      ),
    );
  }

  if (view.map !== null) {
    const pickerBox = el(doc, "div", { id: "destination-picker" });
    pickerBox.appendChild(
      el(doc, "label", { for: "destination" }, "destination (assistant-set):"),
    );
    const select = el(doc, "select", { id: "destination" });
    select.appendChild(el(doc, "option", { value: "" }, "choose…"));
    for (const node of view.map.nodes) {
      if (node.kind !== "poi") continue;
      const attrs: Record<string, string> = { value: String(node.id) };
      if (view.destination === node.id) attrs.selected = "selected";
      select.appendChild(
        el(doc, "option", attrs, node.label ?? `node ${node.id}`),
      );
    }
    pickerBox.appendChild(select);
    panel.appendChild(pickerBox);

    const admin = el(doc, "div", { id: "admin" });
    admin.appendChild(el(doc, "span", {}, "edges:"));
    for (const edge of view.map.edges) {
      admin.appendChild(
        el(
          doc,
          "button",
          {
            class: "edge-toggle",
            "data-edge": String(edge.id),
            "data-enabled": String(edge.enabled),
          },
          `edge ${edge.id}: ${edge.enabled ? "enabled" : "disabled"}`,
        ),
      );
    }
    panel.appendChild(admin);
  }
  return panel;
}

/** Rebuild the app DOM under `root` from the view. */
export function render(view: ViewState, root: HTMLElement): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const banner = renderBanner(doc, view);
  if (banner !== null) root.appendChild(banner);

  const header = el(doc, "header", {});
  header.appendChild(
    el(
      doc,
      "button",
      { id: "mode-toggle", "data-mode": view.mode },
      view.mode === "blind" ? "switch to sighted debug" : "switch to blind",
    ),
  );
  header.appendChild(
    el(doc, "button", { id: "sweep-toggle" }, "toggle sweep mode"),
  );
  header.appendChild(
    el(doc, "span", { id: "status", "data-status": view.connection }, view.connection),
  );
  root.appendChild(header);

  root.appendChild(renderPhone(doc, view));
  if (view.mode === "debug") {
    root.appendChild(renderDebug(doc, view));
  }
}
