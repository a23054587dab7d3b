/**
 * Wire protocol for the /ws walker channel, mirrored from the server.
 * Every inbound frame is schema-checked; malformed frames are dropped by the
 * caller rather than crashing the render loop.
 */
import { z } from "zod";

export const SCREEN_WIDTH = 320;
export const SCREEN_HEIGHT = 240;

/** Strip palette, keyed by the color names the server uses. */
export const PALETTE: Record<string, string> = {
  RED: "rgb(220,30,30)",
  GREEN: "rgb(30,180,60)",
  BLUE: "rgb(30,60,220)",
  YELLOW: "rgb(230,220,40)",
  MAGENTA: "rgb(200,40,200)",
  CYAN: "rgb(40,200,210)",
};

const point = z.tuple([z.number(), z.number()]);

export const poseSchema = z.object({
  x: z.number(),
  y: z.number(),
  heading: z.number(),
  sweep: z.number(),
});

export const guidanceSchema = z.object({
  node: z.number().int(),
  destination_reached: z.boolean(),
  deployment_version: z.number().int(),
  next: z
    .object({
      edge: z.number().int(),
      direction: z.string(),
      expected_pair: z.array(z.string()).length(2),
      remaining_distance: z.number(),
    })
    .nullable(),
});

export const navEventSchema = z.object({
  kind: z.string(),
  tick: z.number().int(),
  data: z.record(z.string(), z.unknown()),
});

export const tickSchema = z.object({
  type: z.literal("tick"),
  t: z.number(),
  frame_id: z.number().int(),
  pose: poseSchema,
  vibration: z.boolean(),
  mode: z.string(),
  events: z.array(navEventSchema),
  guidance: guidanceSchema.nullable(),
});

export const deploymentSchema = z.object({
  deployment_id: z.number().int(),
  version: z.number().int(),
  nodes: z.array(
    z.object({
      id: z.number().int(),
      position: point,
      kind: z.string(),
      label: z.string().nullable(),
    }),
  ),
  edges: z.array(
    z.object({
      id: z.number().int(),
      from: z.number().int(),
      to: z.number().int(),
      polyline: z.array(point),
      color_pair: z.tuple([z.string(), z.string()]),
      enabled: z.boolean(),
    }),
  ),
  anchors: z.array(
    z.object({
      qr_id: z.number().int(),
      node: z.number().int(),
      position: point,
      size: z.number(),
    }),
  ),
  floor_bounds: z.tuple([z.number(), z.number(), z.number(), z.number()]),
});

export const mapSchema = z.object({
  type: z.literal("map"),
  deployment: deploymentSchema,
});

export const frameSchema = z.object({
  type: z.literal("frame"),
  frame_id: z.number().int(),
  png_base64: z.string(),
});

export const errorSchema = z.object({
  type: z.literal("error"),
  error: z.string(),
});

export const patchAckSchema = z.object({
  type: z.literal("patch_ack"),
  version: z.number().int(),
});

export const tickAckSchema = z.object({
  type: z.literal("tick_ack"),
  destination: z.number().int(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  tickSchema,
  mapSchema,
  frameSchema,
  errorSchema,
  patchAckSchema,
  tickAckSchema,
]);

export type Pose = z.infer<typeof poseSchema>;
export type Guidance = z.infer<typeof guidanceSchema>;
export type NavEvent = z.infer<typeof navEventSchema>;
export type TickMessage = z.infer<typeof tickSchema>;
export type DeploymentDoc = z.infer<typeof deploymentSchema>;
export type MapMessage = z.infer<typeof mapSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

/** Parse one websocket frame; null when it is not valid JSON or off-schema. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  const result = serverMessageSchema.safeParse(doc);
  return result.success ? result.data : null;
}

// ---------------------------------------------------------------------------
// client -> server

export interface TouchPoint {
  u: number;
  v: number;
}

export interface InputMessage {
  type: "input";
  turn: -1 | 0 | 1;
  step: boolean;
  touch: TouchPoint | null;
  sweep_override: number | null;
}

export interface SetDestinationMessage {
  type: "set_destination";
  node: number;
}

export interface AdminPatchMessage {
  type: "admin_patch";
  ops: { op: "set_edge_enabled"; edge: number; enabled: boolean }[];
}

export type ClientMessage =
  | InputMessage
  | SetDestinationMessage
  | AdminPatchMessage
  | { type: "get_frame" }
  | { type: "get_map" };
