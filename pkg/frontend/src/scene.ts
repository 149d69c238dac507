// Event-sourced scene state. Everything the console renders is derived by
// folding ConsoleInput values (pushed broker events plus the results of
// the operator's own commands) through a pure reducer, so the whole UI can
// be driven from a recorded session log in tests. No wall clock in here;
// animation time lives in main.ts.

import {
  type BrokerRecord,
  type IntentEventMsg,
  type JointTrajectoryMsg,
  type ObjectStateMsg,
  type PathMsg,
  type PoseMsg,
  type PoseStampedMsg,
  decodeRecord,
  kindForTopic,
  parseTopic,
} from "./protocol.js";
import {
  type Transform,
  type WireTransform,
  compose,
  transformFromWire,
} from "./transforms.js";
import type { PreviewIntent } from "./interpolate.js";

export type ConsoleInput =
  | { type: "event"; topic: string; record: BrokerRecord }
  | {
      type: "command_result";
      name: string;
      args: Record<string, unknown>;
      result: unknown;
    };

export type RobotStyle = "idle" | "previewing" | "executing";

export interface LinkView {
  name: string;
  visual_mesh: string | null;
}

export interface JointViewMsg {
  name: string;
  type: string;
  parent: string;
  child: string;
  origin: WireTransform;
  axis: [number, number, number] | null;
  limits: [number, number] | null;
}

export interface TreeView {
  name: string;
  root: string;
  links: LinkView[];
  joints: JointViewMsg[];
}

export interface RobotView {
  label: string;
  model: string | null;
  marker: string | null;
  tree: TreeView | null;
  hologramOffset: WireTransform;
  style: RobotStyle;
  lastPlan: PathMsg | null;
  lastTrajectory: JointTrajectoryMsg | null;
}

export interface HmdView {
  pose: PoseMsg | null;
  lastStamp: number | null;
  samples: number;
}

export interface ObjectView {
  category: string;
  pose: PoseMsg | null;
  jointPositions: Record<string, number>;
}

export interface MarkerView {
  poseInAnchor: WireTransform;
  isPrimary: boolean;
}

export type IntentPhase =
  | "submitted"
  | "preview_started"
  | "execution_started"
  | "completed"
  | "superseded";

export interface IntentView {
  intentId: number;
  robotId: number;
  kind: string;
  phase: IntentPhase;
  previewEpoch: number | null;
  executeEpoch: number | null;
  phaseStamps: Record<string, number>;
}

export interface SceneModel {
  settings: { delaySeconds: number; poseRateHz: number } | null;
  robots: Record<string, RobotView>;
  hmds: Record<string, HmdView>;
  objects: Record<string, ObjectView>;
  markers: Record<string, MarkerView>;
  intents: Record<string, IntentView>;
  robotModels: string[];
  objectBoxes: Record<string, [number, number, number]>;
  eventsApplied: number;
}

const IDENTITY_WIRE: WireTransform = {
  translation: [0, 0, 0],
  rotation: [0, 0, 0, 1],
};

export function emptyScene(): SceneModel {
  return {
    settings: null,
    robots: {},
    hmds: {},
    objects: {},
    markers: {},
    intents: {},
    robotModels: [],
    objectBoxes: {},
    eventsApplied: 0,
  };
}

function robotSlot(scene: SceneModel, id: number | string): RobotView {
  const key = String(id);
  let robot = scene.robots[key];
  if (robot === undefined) {
    robot = {
      label: `robot-${key}`,
      model: null,
      marker: null,
      tree: null,
      hologramOffset: structuredClone(IDENTITY_WIRE),
      style: "idle",
      lastPlan: null,
      lastTrajectory: null,
    };
    scene.robots[key] = robot;
  }
  return robot;
}

function hmdSlot(scene: SceneModel, id: number | string): HmdView {
  const key = String(id);
  let hmd = scene.hmds[key];
  if (hmd === undefined) {
    hmd = { pose: null, lastStamp: null, samples: 0 };
    scene.hmds[key] = hmd;
  }
  return hmd;
}

function objectSlot(scene: SceneModel, id: number | string): ObjectView {
  const key = String(id);
  let obj = scene.objects[key];
  if (obj === undefined) {
    obj = { category: "", pose: null, jointPositions: {} };
    scene.objects[key] = obj;
  }
  return obj;
}

function intentSlot(scene: SceneModel, msg: IntentEventMsg): IntentView {
  const key = String(msg.intent_id);
  let intent = scene.intents[key];
  if (intent === undefined) {
    intent = {
      intentId: msg.intent_id,
      robotId: msg.robot_id,
      kind: msg.kind,
      phase: "submitted",
      previewEpoch: null,
      executeEpoch: null,
      phaseStamps: {},
    };
    scene.intents[key] = intent;
  }
  return intent;
}

// Derived, order-free: executing wins over previewing wins over idle.
function restyleRobot(scene: SceneModel, robotId: number): void {
  const robot = scene.robots[String(robotId)];
  if (robot === undefined) {
    return;
  }
  let style: RobotStyle = "idle";
  for (const intent of Object.values(scene.intents)) {
    if (intent.robotId !== robotId) {
      continue;
    }
    if (intent.phase === "execution_started") {
      style = "executing";
      break;
    }
    if (intent.phase === "preview_started") {
      style = "previewing";
    }
  }
  robot.style = style;
}

function applyIntentEvent(scene: SceneModel, msg: IntentEventMsg): void {
  const intent = intentSlot(scene, msg);
  if (msg.phase === "preview_started") {
    // A new preview supersedes whatever this robot was previously previewing.
    for (const other of Object.values(scene.intents)) {
      if (
        other.robotId === msg.robot_id &&
        other.intentId !== msg.intent_id &&
        (other.phase === "submitted" || other.phase === "preview_started")
      ) {
        other.phase = "superseded";
      }
    }
    intent.phase = "preview_started";
    if (intent.previewEpoch === null) {
      intent.previewEpoch = msg.stamp;
    }
  } else if (msg.phase === "execution_started") {
    intent.phase = "execution_started";
    if (intent.executeEpoch === null) {
      intent.executeEpoch = msg.stamp;
    }
  } else if (msg.phase === "completed") {
    intent.phase = "completed";
  }
  intent.phaseStamps[msg.phase] = msg.stamp;
  restyleRobot(scene, msg.robot_id);
}

function applyEvent(scene: SceneModel, topic: string, record: BrokerRecord): void {
  const kind = kindForTopic(topic);
  const parsed = parseTopic(topic);
  const msg = decodeRecord(topic, record);
  switch (kind) {
    case "pose_stamped": {
      const ps = msg as PoseStampedMsg;
      const hmd = hmdSlot(scene, parsed.id);
      hmd.pose = ps.pose;
      hmd.lastStamp = ps.header.stamp;
      hmd.samples += 1;
      break;
    }
    case "path": {
      robotSlot(scene, parsed.id).lastPlan = msg as PathMsg;
      break;
    }
    case "joint_trajectory": {
      robotSlot(scene, parsed.id).lastTrajectory = msg as JointTrajectoryMsg;
      break;
    }
    case "object_state": {
      const state = msg as ObjectStateMsg;
      const obj = objectSlot(scene, parsed.id);
      obj.category = state.category;
      obj.pose = state.pose;
      obj.jointPositions = {};
      state.joint_names.forEach((name, k) => {
        obj.jointPositions[name] = state.joint_positions[k]!;
      });
      break;
    }
    case "intent_event": {
      applyIntentEvent(scene, msg as IntentEventMsg);
      break;
    }
  }
  scene.eventsApplied += 1;
}

function asRecord(v: unknown): Record<string, unknown> {
  if (typeof v !== "object" || v === null || Array.isArray(v)) {
    throw new Error("expected an object result");
  }
  return v as Record<string, unknown>;
}

function applyCommandResult(
  scene: SceneModel,
  name: string,
  args: Record<string, unknown>,
  result: unknown,
): void {
  switch (name) {
    case "get_settings":
    case "configure": {
      const r = asRecord(result);
      scene.settings = {
        delaySeconds: r["delay_seconds"] as number,
        poseRateHz: r["pose_rate_hz"] as number,
      };
      break;
    }
    case "get_manifest": {
      const r = asRecord(result);
      for (const entry of r["entries"] as Array<Record<string, unknown>>) {
        const entryName = entry["name"] as string;
        const kind = entry["kind"] as string;
        if (kind === "object_fbx" && Array.isArray(entry["bounding_box"])) {
          scene.objectBoxes[entryName] = entry["bounding_box"] as [
            number,
            number,
            number,
          ];
        } else if (kind.startsWith("robot_")) {
          if (!scene.robotModels.includes(entryName)) {
            scene.robotModels.push(entryName);
          }
        }
      }
      break;
    }
    case "register_robot": {
      const r = asRecord(result);
      const robot = robotSlot(scene, r["id"] as number);
      robot.label = r["label"] as string;
      if (typeof args["model"] === "string") {
        robot.model = args["model"];
      }
      if (typeof args["marker"] === "string") {
        robot.marker = args["marker"];
      }
      break;
    }
    case "register_hmd": {
      hmdSlot(scene, asRecord(result)["id"] as number);
      break;
    }
    case "register_object": {
      const r = asRecord(result);
      const obj = objectSlot(scene, r["id"] as number);
      if (obj.category === "") {
        obj.category = r["label"] as string;
      }
      break;
    }
    case "resolve_robot": {
      const tree = asRecord(result) as unknown as TreeView;
      for (const robot of Object.values(scene.robots)) {
        if (robot.model === tree.name) {
          robot.tree = tree;
        }
      }
      break;
    }
    case "observe_marker": {
      const r = asRecord(result);
      scene.markers[r["marker"] as string] = {
        poseInAnchor: r["pose_in_anchor"] as unknown as WireTransform,
        isPrimary: r["is_primary"] as boolean,
      };
      break;
    }
    case "adjust_hologram": {
      const r = asRecord(result);
      const robot = scene.robots[String(args["robot"])];
      if (robot !== undefined) {
        robot.hologramOffset = r["offset"] as unknown as WireTransform;
      }
      break;
    }
    case "submit_navigation":
    case "submit_manipulation": {
      const r = asRecord(result);
      const intentId = r["intent_id"] as number;
      const key = String(intentId);
      const existing = scene.intents[key];
      const view: IntentView = existing ?? {
        intentId,
        robotId: args["robot"] as number,
        kind: name === "submit_navigation" ? "navigation" : "manipulation",
        phase: "submitted",
        previewEpoch: null,
        executeEpoch: null,
        phaseStamps: {},
      };
      view.previewEpoch = r["preview_epoch"] as number;
      view.executeEpoch = r["execute_epoch"] as number;
      scene.intents[key] = view;
      break;
    }
    default:
      // list_topics, list_entities, relative_transform, hologram_pose, ...
      // are queries; they change nothing in the scene.
      break;
  }
}

// Pure fold step: never mutates the input scene.
export function reduce(scene: SceneModel, input: ConsoleInput): SceneModel {
  const next = structuredClone(scene);
  if (input.type === "event") {
    applyEvent(next, input.topic, input.record);
  } else {
    applyCommandResult(next, input.name, input.args, input.result);
  }
  return next;
}

export function reduceAll(
  scene: SceneModel,
  inputs: Iterable<ConsoleInput>,
): SceneModel {
  let acc = scene;
  for (const input of inputs) {
    acc = reduce(acc, input);
  }
  return acc;
}

// Where the robot's hologram sits in anchor space: marker pose composed
// with the operator's drag offset. Null until the marker has been sighted.
export function hologramPose(scene: SceneModel, robotId: number | string): Transform | null {
  const robot = scene.robots[String(robotId)];
  if (robot === undefined || robot.marker === null) {
    return null;
  }
  const marker = scene.markers[robot.marker];
  if (marker === undefined) {
    return null;
  }
  return compose(
    transformFromWire(marker.poseInAnchor),
    transformFromWire(robot.hologramOffset),
  );
}

// The intent a robot's hologram should currently animate, if any.
export function activePreview(
  scene: SceneModel,
  robotId: number | string,
): (PreviewIntent & { intentId: number }) | null {
  const robot = scene.robots[String(robotId)];
  if (robot === undefined) {
    return null;
  }
  for (const intent of Object.values(scene.intents)) {
    if (intent.robotId !== Number(robotId)) {
      continue;
    }
    if (intent.phase !== "preview_started" && intent.phase !== "execution_started") {
      continue;
    }
    const payload =
      intent.kind === "navigation" ? robot.lastPlan : robot.lastTrajectory;
    if (payload === null || intent.previewEpoch === null || intent.executeEpoch === null) {
      continue;
    }
    return {
      intentId: intent.intentId,
      kind: intent.kind as "navigation" | "manipulation",
      payload,
      previewEpoch: intent.previewEpoch,
      executeEpoch: intent.executeEpoch,
    };
  }
  return null;
}
