/**
 * View state and its pure reducer.  The UI holds no simulation state of its
 * own: everything shown is derived from the latest server messages, so a
 * reload mid-run resumes a consistent display from the live stream alone.
 */
import type {
  DeploymentDoc,
  ServerMessage,
  TickMessage,
  TouchPoint,
} from "./protocol.js";

export type UiMode = "blind" | "debug";
export type ConnectionStatus = "connecting" | "connected" | "disconnected";

const MAX_NOTIFICATIONS = 8;

export interface ViewState {
  mode: UiMode;
  connection: ConnectionStatus;
  tick: TickMessage | null;
  map: DeploymentDoc | null;
  destination: number | null;
  finger: TouchPoint | null;
  vibration: boolean;
  arrived: boolean;
  notifications: string[];
  lastError: string | null;
}

export const initialView: ViewState = {
  mode: "blind",
  connection: "connecting",
  tick: null,
  map: null,
  destination: null,
  finger: null,
  vibration: false,
  arrived: false,
  notifications: [],
  lastError: null,
};

function pushNotification(list: string[], text: string): string[] {
  return [...list, text].slice(-MAX_NOTIFICATIONS);
}

function applyTick(view: ViewState, msg: TickMessage): ViewState {
  let notifications = view.notifications;
  for (const ev of msg.events) {
    if (ev.kind === "marker_seen") {
      notifications = pushNotification(
        notifications,
        `tag ${String(ev.data["qr_id"])} scanned`,
      );
    }
  }
  const arrived =
    msg.mode === "arrived" || (msg.guidance?.destination_reached ?? false);
  return {
    ...view,
    tick: msg,
    vibration: msg.vibration,
    arrived,
    notifications,
  };
}

/** Fold one schema-valid server message into the view. */
export function applyServer(view: ViewState, msg: ServerMessage): ViewState {
  switch (msg.type) {
    case "tick":
      return applyTick(view, msg);
    case "map":
      return { ...view, map: msg.deployment };
    case "tick_ack":
      return {
        ...view,
        destination: msg.destination,
        arrived: false,
        notifications: pushNotification(
          view.notifications,
          `destination set: node ${msg.destination}`,
        ),
      };
    case "patch_ack":
      return {
        ...view,
        notifications: pushNotification(
          view.notifications,
          `path updated to version ${msg.version}`,
        ),
      };
    case "error":
      return { ...view, lastError: msg.error };
    case "frame":
      return view; // camera frames are debug-only and rendered on demand
  }
}

/**
 * Connection transitions.  Leaving "connected" drops the last tick so a
 * reconnect never paints a stale pose; the next tick payload repopulates
 * everything.
 */
export function setConnection(
  view: ViewState,
  connection: ConnectionStatus,
): ViewState {
  if (connection === view.connection) return view;
  if (connection !== "connected") {
    return { ...view, connection, tick: null, vibration: false };
  }
  return { ...view, connection, lastError: null };
}

export function setMode(view: ViewState, mode: UiMode): ViewState {
  return { ...view, mode };
}

export function setFinger(view: ViewState, finger: TouchPoint | null): ViewState {
  return { ...view, finger };
}
