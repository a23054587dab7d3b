import type { DeploymentDoc, TickMessage } from "../src/protocol.js";

/** Miniature two-node deployment for render/state tests. */
export function sampleDeployment(): DeploymentDoc {
  return {
    deployment_id: 100,
    version: 1,
    nodes: [
      { id: 0, position: [1.5, 3.0], kind: "poi", label: "entrance" },
      { id: 1, position: [6.5, 3.0], kind: "poi", label: "reading room" },
    ],
    edges: [
      {
        id: 0,
        from: 0,
        to: 1,
        polyline: [
          [1.5, 3.0],
          [6.5, 3.0],
        ],
        color_pair: ["RED", "BLUE"],
        enabled: true,
      },
    ],
    anchors: [
      { qr_id: 1, node: 0, position: [1.5, 3.0], size: 0.2 },
      { qr_id: 2, node: 1, position: [6.5, 3.0], size: 0.2 },
    ],
    floor_bounds: [0, 0, 8, 6],
  };
}

export function sampleTick(overrides: Partial<TickMessage> = {}): TickMessage {
  return {
    type: "tick",
    t: 0.1,
    frame_id: 1,
    pose: { x: 2.0, y: 3.0, heading: 0.0, sweep: 0.2 },
    vibration: false,
    mode: "on_edge",
    events: [],
    guidance: {
      node: 0,
      destination_reached: false,
      deployment_version: 1,
      next: {
        edge: 0,
        direction: "forward",
        expected_pair: ["RED", "BLUE"],
        remaining_distance: 4.5,
      },
    },
    ...overrides,
  };
}
