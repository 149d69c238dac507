// Wire types for the gateway frame protocol and the payloads carried on
// broker topics. Shapes must stay in lockstep with the backend's
// docs/wire-format.md and docs/topics.md; the replay tests pin them
// against a recorded live session.

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface Quat {
  x: number;
  y: number;
  z: number;
  w: number;
}

export interface HeaderMsg {
  stamp: number;
  frame_id: string;
}

export interface PoseMsg {
  position: Vec3;
  orientation: Quat;
}

export interface PoseStampedMsg {
  header: HeaderMsg;
  pose: PoseMsg;
}

export interface PathMsg {
  header: HeaderMsg;
  poses: PoseStampedMsg[];
}

export interface TrajectoryPointMsg {
  positions: number[];
  velocities: number[];
  time_from_start: number;
}

export interface JointTrajectoryMsg {
  header: HeaderMsg;
  joint_names: string[];
  points: TrajectoryPointMsg[];
}

export interface ObjectStateMsg {
  category: string;
  pose: PoseMsg;
  joint_names: string[];
  joint_positions: number[];
}

export interface IntentEventMsg {
  intent_id: number;
  robot_id: number;
  kind: string;
  phase: string;
  stamp: number;
}

export type MessageKind =
  | "pose_stamped"
  | "path"
  | "joint_trajectory"
  | "object_state"
  | "intent_event";

export interface BrokerRecord {
  offset: number;
  stamp: number;
  payload: string;
}

// Frames the server sends back. Requests are built ad hoc in gateway.ts;
// only responses need discriminated types on this side.
export interface EventFrame {
  type: "EVENT";
  sub: number;
  topic: string;
  record: BrokerRecord;
}

export interface ErrorFrame {
  type: "ERROR";
  corr: number | null;
  error: string;
  message: string;
}

export interface ReplyFrame {
  type: "SUBSCRIBE" | "PUBLISH" | "FETCH" | "COMMAND";
  corr: number;
  [key: string]: unknown;
}

export type ServerFrame = EventFrame | ErrorFrame | ReplyFrame;

export class ProtocolError extends Error {}

const TOPIC_RE = /^\/(robot|hmd|object)\/(0|[1-9][0-9]*)\/([a-z_]+)$/;
const INTENT_EVENTS_TOPIC = "/system/intent_events";

const CHANNEL_KINDS: Record<string, Record<string, MessageKind>> = {
  robot: { navigation_plan: "path", joint_trajectory: "joint_trajectory" },
  hmd: { pose: "pose_stamped" },
  object: { state: "object_state" },
};

export interface ParsedTopic {
  kind: string;
  id: number;
  channel: string;
}

export function parseTopic(topic: string): ParsedTopic {
  if (topic === INTENT_EVENTS_TOPIC) {
    return { kind: "system", id: 0, channel: "intent_events" };
  }
  const m = TOPIC_RE.exec(topic);
  if (m === null) {
    throw new ProtocolError(`unrecognized topic: ${topic}`);
  }
  const kind = m[1]!;
  const id = m[2]!;
  const channel = m[3]!;
  if (CHANNEL_KINDS[kind]![channel] === undefined) {
    throw new ProtocolError(`unknown channel ${channel} for kind ${kind}`);
  }
  return { kind, id: Number(id), channel };
}

export function kindForTopic(topic: string): MessageKind {
  const parsed = parseTopic(topic);
  if (parsed.kind === "system") {
    return "intent_event";
  }
  return CHANNEL_KINDS[parsed.kind]![parsed.channel]!;
}

function expect(cond: boolean, path: string): void {
  if (!cond) {
    throw new ProtocolError(`payload shape mismatch at ${path}`);
  }
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function checkVec3(v: unknown, path: string): asserts v is Vec3 {
  const o = v as Vec3;
  expect(typeof v === "object" && v !== null, path);
  expect(isNum(o.x) && isNum(o.y) && isNum(o.z), path);
}

function checkQuat(v: unknown, path: string): asserts v is Quat {
  const o = v as Quat;
  expect(typeof v === "object" && v !== null, path);
  expect(isNum(o.x) && isNum(o.y) && isNum(o.z) && isNum(o.w), path);
}

function checkHeader(v: unknown, path: string): asserts v is HeaderMsg {
  const o = v as HeaderMsg;
  expect(typeof v === "object" && v !== null, path);
  expect(isNum(o.stamp) && typeof o.frame_id === "string", path);
}

function checkPose(v: unknown, path: string): asserts v is PoseMsg {
  const o = v as PoseMsg;
  expect(typeof v === "object" && v !== null, path);
  checkVec3(o.position, `${path}.position`);
  checkQuat(o.orientation, `${path}.orientation`);
}

function checkNumArray(v: unknown, path: string): asserts v is number[] {
  expect(Array.isArray(v) && v.every(isNum), path);
}

function checkStrArray(v: unknown, path: string): asserts v is string[] {
  expect(Array.isArray(v) && v.every((s) => typeof s === "string"), path);
}

export function decodePayload(kind: MessageKind, payload: string): unknown {
  let raw: unknown;
  try {
    raw = JSON.parse(payload);
  } catch (exc) {
    throw new ProtocolError(`payload is not valid JSON: ${exc}`);
  }
  expect(typeof raw === "object" && raw !== null && !Array.isArray(raw), "$");
  switch (kind) {
    case "pose_stamped": {
      const m = raw as PoseStampedMsg;
      checkHeader(m.header, "$.header");
      checkPose(m.pose, "$.pose");
      return m;
    }
    case "path": {
      const m = raw as PathMsg;
      checkHeader(m.header, "$.header");
      expect(Array.isArray(m.poses), "$.poses");
      m.poses.forEach((p, i) => {
        checkHeader((p as PoseStampedMsg).header, `$.poses[${i}].header`);
        checkPose((p as PoseStampedMsg).pose, `$.poses[${i}].pose`);
      });
      return m;
    }
    case "joint_trajectory": {
      const m = raw as JointTrajectoryMsg;
      checkHeader(m.header, "$.header");
      checkStrArray(m.joint_names, "$.joint_names");
      expect(Array.isArray(m.points), "$.points");
      m.points.forEach((p, i) => {
        checkNumArray(p.positions, `$.points[${i}].positions`);
        expect(isNum(p.time_from_start), `$.points[${i}].time_from_start`);
      });
      return m;
    }
    case "object_state": {
      const m = raw as ObjectStateMsg;
      expect(typeof m.category === "string", "$.category");
      checkPose(m.pose, "$.pose");
      checkStrArray(m.joint_names, "$.joint_names");
      checkNumArray(m.joint_positions, "$.joint_positions");
      return m;
    }
    case "intent_event": {
      const m = raw as IntentEventMsg;
      expect(isNum(m.intent_id), "$.intent_id");
      expect(isNum(m.robot_id), "$.robot_id");
      expect(typeof m.kind === "string", "$.kind");
      expect(typeof m.phase === "string", "$.phase");
      expect(isNum(m.stamp), "$.stamp");
      return m;
    }
  }
}

export function decodeRecord(topic: string, record: BrokerRecord): unknown {
  return decodePayload(kindForTopic(topic), record.payload);
}
