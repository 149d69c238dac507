// Console entry point: wires the gateway connection into the scene
// reducer and renders a top-down anchor-space view on a 2D canvas.
// Everything stateful funnels through reduce(); this file only holds
// presentation state (camera, drag-in-progress, animation clocks).

import { GatewayConnection } from "./gateway.js";
import { samplePreview } from "./interpolate.js";
import type { PoseMsg } from "./protocol.js";
import {
  type ConsoleInput,
  type SceneModel,
  activePreview,
  emptyScene,
  hologramPose,
  reduce,
} from "./scene.js";
import { DEFAULT_SETTINGS, settingsViolations } from "./settings.js";
import { applyTransform } from "./transforms.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

let scene: SceneModel = emptyScene();
let conn: GatewayConnection | null = null;
const sessionLog: ConsoleInput[] = [];
// Animation clocks: intent id -> performance.now() when its preview began.
const previewStartedAt = new Map<number, number>();

const canvas = $<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d")!;
const SCALE = 120; // px per meter
const STYLE_COLORS: Record<string, string> = {
  idle: "#9aa5b1",
  previewing: "#3ec6e0",
  executing: "#f2994a",
};

function toScreen(x: number, y: number): [number, number] {
  return [canvas.width / 2 + x * SCALE, canvas.height / 2 - y * SCALE];
}

function fromScreen(px: number, py: number): [number, number] {
  return [(px - canvas.width / 2) / SCALE, (canvas.height / 2 - py) / SCALE];
}

function log(line: string): void {
  const area = $<HTMLTextAreaElement>("log");
  area.value += `${line}\n`;
  area.scrollTop = area.scrollHeight;
}

function onInput(input: ConsoleInput): void {
  sessionLog.push(input);
  const before = scene;
  scene = reduce(scene, input);
  if (input.type === "event" && input.topic === "/system/intent_events") {
    const msg = JSON.parse(input.record.payload) as {
      intent_id: number;
      phase: string;
    };
    if (msg.phase === "preview_started") {
      previewStartedAt.set(msg.intent_id, performance.now());
    }
    log(`intent ${msg.intent_id}: ${msg.phase}`);
  }
  if (before.settings === null && scene.settings !== null) {
    $<HTMLInputElement>("delay").value = String(scene.settings.delaySeconds);
    $<HTMLInputElement>("rate").value = String(scene.settings.poseRateHz);
  }
  refreshSidebar();
}

function refreshSidebar(): void {
  const modelSel = $<HTMLSelectElement>("model");
  const current = modelSel.value;
  modelSel.innerHTML = "";
  for (const name of scene.robotModels) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    modelSel.appendChild(opt);
  }
  if (scene.robotModels.includes(current)) {
    modelSel.value = current;
  }

  const markerSel = $<HTMLSelectElement>("spawn-marker");
  const picked = markerSel.value;
  markerSel.innerHTML = "";
  for (const name of Object.keys(scene.markers)) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    markerSel.appendChild(opt);
  }
  if (picked in scene.markers) {
    markerSel.value = picked;
  }

  const list = $<HTMLUListElement>("intents");
  list.innerHTML = "";
  for (const intent of Object.values(scene.intents)) {
    const li = document.createElement("li");
    li.textContent = `#${intent.intentId} robot ${intent.robotId} ${intent.kind}: ${intent.phase}`;
    list.appendChild(li);
  }
}

interface DragState {
  robotId: string;
  startX: number;
  startY: number;
  dx: number;
  dy: number;
}
let drag: DragState | null = null;

function robotAtScreen(px: number, py: number): string | null {
  for (const id of Object.keys(scene.robots)) {
    const pose = hologramPose(scene, id);
    if (pose === null) {
      continue;
    }
    const [sx, sy] = toScreen(pose.translation.x, pose.translation.y);
    if (Math.abs(px - sx) < 24 && Math.abs(py - sy) < 24) {
      return id;
    }
  }
  return null;
}

canvas.addEventListener("mousedown", (ev) => {
  const hit = robotAtScreen(ev.offsetX, ev.offsetY);
  if (hit !== null) {
    drag = { robotId: hit, startX: ev.offsetX, startY: ev.offsetY, dx: 0, dy: 0 };
  }
});

canvas.addEventListener("mousemove", (ev) => {
  if (drag !== null) {
    drag.dx = (ev.offsetX - drag.startX) / SCALE;
    drag.dy = -(ev.offsetY - drag.startY) / SCALE;
  }
});

canvas.addEventListener("mouseup", (ev) => {
  if (drag !== null) {
    const d = drag;
    drag = null;
    if (conn !== null && (d.dx !== 0 || d.dy !== 0)) {
      conn
        .command("adjust_hologram", {
          robot: Number(d.robotId),
          delta: { translation: [d.dx, d.dy, 0.0] },
        })
        .catch((err) => log(String(err)));
    }
    return;
  }
  // No robot under the cursor: place or re-sight a marker here.
  const name = $<HTMLInputElement>("marker-name").value.trim();
  if (conn === null || name === "") {
    return;
  }
  const [x, y] = fromScreen(ev.offsetX, ev.offsetY);
  conn
    .command("observe_marker", {
      hmd: 0,
      marker: name,
      marker_in_hmd: { translation: [x, y, 0.0] },
    })
    .catch((err) => log(String(err)));
});

function drawRobot(id: string): void {
  const robot = scene.robots[id]!;
  const pose = hologramPose(scene, id);
  if (pose === null) {
    return;
  }
  let cx = pose.translation.x;
  let cy = pose.translation.y;
  if (drag !== null && drag.robotId === id) {
    cx += drag.dx;
    cy += drag.dy;
  }

  const preview = activePreview(scene, id);
  if (preview !== null && preview.kind === "navigation" && robot.lastPlan) {
    ctx.strokeStyle = STYLE_COLORS[robot.style]!;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    robot.lastPlan.poses.forEach((ps, i) => {
      const world = applyTransform(pose, ps.pose.position);
      const [sx, sy] = toScreen(world.x, world.y);
      if (i === 0) {
        ctx.moveTo(sx, sy);
      } else {
        ctx.lineTo(sx, sy);
      }
    });
    ctx.stroke();
    ctx.setLineDash([]);
    const startedAt = previewStartedAt.get(preview.intentId);
    if (startedAt !== undefined) {
      const t = (performance.now() - startedAt) / 1000;
      const sampled = samplePreview(preview, Math.max(0, t)) as PoseMsg;
      const world = applyTransform(pose, sampled.position);
      const [sx, sy] = toScreen(world.x, world.y);
      ctx.fillStyle = STYLE_COLORS[robot.style]!;
      ctx.beginPath();
      ctx.arc(sx, sy, 7, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  const [sx, sy] = toScreen(cx, cy);
  ctx.fillStyle = STYLE_COLORS[robot.style]!;
  ctx.globalAlpha = robot.style === "previewing" ? 0.6 : 1.0;
  ctx.fillRect(sx - 18, sy - 18, 36, 36);
  ctx.globalAlpha = 1.0;
  ctx.fillStyle = "#1b2733";
  ctx.fillText(`${robot.label} (${robot.model ?? "?"})`, sx - 18, sy - 24);

  if (preview !== null && preview.kind === "manipulation") {
    const startedAt = previewStartedAt.get(preview.intentId);
    if (startedAt !== undefined) {
      const t = (performance.now() - startedAt) / 1000;
      const joints = samplePreview(preview, Math.max(0, t)) as Record<
        string,
        number
      >;
      let row = 0;
      for (const [name, value] of Object.entries(joints)) {
        ctx.fillText(`${name}: ${value.toFixed(3)}`, sx - 18, sy + 30 + row * 12);
        row += 1;
      }
    }
  }
}

function draw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px system-ui, sans-serif";

  // anchor axes
  ctx.strokeStyle = "#d4dbe3";
  const [ox, oy] = toScreen(0, 0);
  ctx.beginPath();
  ctx.moveTo(0, oy);
  ctx.lineTo(canvas.width, oy);
  ctx.moveTo(ox, 0);
  ctx.lineTo(ox, canvas.height);
  ctx.stroke();

  for (const [name, marker] of Object.entries(scene.markers)) {
    const [tx, ty] = marker.poseInAnchor.translation;
    const [sx, sy] = toScreen(tx, ty);
    ctx.fillStyle = marker.isPrimary ? "#7b4cd8" : "#b09be0";
    ctx.beginPath();
    ctx.moveTo(sx, sy - 9);
    ctx.lineTo(sx + 9, sy);
    ctx.lineTo(sx, sy + 9);
    ctx.lineTo(sx - 9, sy);
    ctx.closePath();
    ctx.fill();
    ctx.fillStyle = "#1b2733";
    ctx.fillText(name, sx + 11, sy - 4);
  }

  for (const [id, obj] of Object.entries(scene.objects)) {
    if (obj.pose === null) {
      continue;
    }
    const box = scene.objectBoxes[obj.category] ?? [0.1, 0.1, 0.1];
    const [sx, sy] = toScreen(obj.pose.position.x, obj.pose.position.y);
    const w = Math.max(6, box[0] * SCALE);
    const h = Math.max(6, box[1] * SCALE);
    ctx.strokeStyle = "#5f8f5a";
    ctx.strokeRect(sx - w / 2, sy - h / 2, w, h);
    ctx.fillStyle = "#1b2733";
    ctx.fillText(`${obj.category} #${id}`, sx + w / 2 + 4, sy);
  }

  for (const id of Object.keys(scene.robots)) {
    drawRobot(id);
  }

  for (const [id, hmd] of Object.entries(scene.hmds)) {
    if (hmd.pose === null) {
      continue;
    }
    const [sx, sy] = toScreen(hmd.pose.position.x, hmd.pose.position.y);
    ctx.fillStyle = "#e05c7e";
    ctx.beginPath();
    ctx.moveTo(sx, sy - 7);
    ctx.lineTo(sx + 6, sy + 6);
    ctx.lineTo(sx - 6, sy + 6);
    ctx.closePath();
    ctx.fill();
    ctx.fillStyle = "#1b2733";
    ctx.fillText(`hmd #${id} (${hmd.samples})`, sx + 9, sy + 4);
  }

  requestAnimationFrame(draw);
}

async function connect(): Promise<void> {
  const url = $<HTMLInputElement>("gateway-url").value;
  conn = await GatewayConnection.open(url);
  conn.onInput = onInput;
  conn.onClose = (reason) => log(`disconnected: ${reason}`);
  log(`connected to ${url}`);

  await conn.command("get_settings");
  await conn.command("get_manifest", { which: "robots" });
  await conn.command("get_manifest", { which: "objects" });
  await conn.subscribe("/system/intent_events");
  const hmd = (await conn.command("register_hmd", {
    label: "console-operator",
  })) as { id: number; topics: string[] };
  for (const topic of hmd.topics) {
    await conn.subscribe(topic);
  }
}

$<HTMLButtonElement>("connect").addEventListener("click", () => {
  connect().catch((err) => log(String(err)));
});

$<HTMLButtonElement>("apply-settings").addEventListener("click", () => {
  const next = {
    delaySeconds: Number($<HTMLInputElement>("delay").value),
    poseRateHz: Number($<HTMLInputElement>("rate").value),
  };
  const problems = settingsViolations(next);
  if (problems.length > 0) {
    log(`settings rejected: ${problems.join("; ")}`);
    return;
  }
  conn
    ?.command("configure", {
      delay_seconds: next.delaySeconds,
      pose_rate_hz: next.poseRateHz,
    })
    .catch((err) => log(String(err)));
});

$<HTMLButtonElement>("spawn").addEventListener("click", async () => {
  if (conn === null) {
    return;
  }
  const model = $<HTMLSelectElement>("model").value;
  const marker = $<HTMLSelectElement>("spawn-marker").value;
  if (model === "" || marker === "") {
    log("spawn needs a model and a sighted marker");
    return;
  }
  try {
    const robot = (await conn.command("register_robot", {
      marker,
      model,
    })) as { id: number; topics: string[] };
    await conn.command("resolve_robot", { name: model });
    for (const topic of robot.topics) {
      await conn.subscribe(topic);
    }
  } catch (err) {
    log(String(err));
  }
});

$<HTMLButtonElement>("demo-nav").addEventListener("click", async () => {
  if (conn === null) {
    return;
  }
  const ids = Object.keys(scene.robots);
  if (ids.length === 0) {
    log("no robot to preview");
    return;
  }
  try {
    await conn.command("submit_navigation", {
      robot: Number(ids[0]),
      waypoints: [
        { t: 0.0, position: [0.0, 0.0, 0.0] },
        { t: 1.0, position: [1.0, 0.0, 0.0] },
        { t: 2.0, position: [1.0, 1.0, 0.0] },
      ],
    });
  } catch (err) {
    log(String(err));
  }
});

$<HTMLButtonElement>("save-log").addEventListener("click", () => {
  $<HTMLTextAreaElement>("log").value = JSON.stringify(
    { inputs: sessionLog },
    null,
    1,
  );
});

$<HTMLInputElement>("delay").value = String(DEFAULT_SETTINGS.delaySeconds);
$<HTMLInputElement>("rate").value = String(DEFAULT_SETTINGS.poseRateHz);
requestAnimationFrame(draw);
