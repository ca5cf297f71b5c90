/**
 * Browser app: upload clips, click joints into bindings, steer the
 * transfer config, and play source / result / target side by side.
 *
 * All authoritative state lives on the service; this file only wires DOM
 * events to the pure modules and re-renders from the latest summary.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  acceptProposals,
  bindingRate,
  clickSourceJoint,
  clickTargetJoint,
  pairColor,
  setBindRootVelocity,
  toJson,
} from "./binding.js";
import { advance, newClock, panelFrame, scrubTo, togglePlay, type Clock } from "./playback.js";
import {
  boneSegments,
  drawFrame,
  fitCamera,
  pickJoint,
  worldBounds,
  type Camera,
} from "./render.js";
import {
  beginTransfer,
  canTransfer,
  controlsEnabled,
  finishTransfer,
  fromSummary,
  initialState,
  transferBlocker,
  type UiState,
} from "./state.js";
import type { FramesFeed, MetricsReport, PositionsBlock, Proposal } from "./types.js";

const api = new ApiClient("");

let state: UiState = initialState();
let clock: Clock = newClock();
let feed: FramesFeed | null = null;
let metrics: MetricsReport | null = null;
let proposals: Proposal[] = [];
let lastEnergy: number[] = [];

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const statusEl = $("status");
const sessionLabel = $("session-id");
const sourceInfo = $("source-info");
const targetInfo = $("target-info");
const sourceJoints = $("source-joints");
const targetJoints = $("target-joints");
const pairsList = $("pairs-list");
const rateLabel = $("binding-rate");
const proposalsEl = $("proposals");
const energyLabel = $("energy");
const metricsEl = $("metrics");
const frameLabel = $("frame-label");
const transferBtn = $<HTMLButtonElement>("transfer");
const playBtn = $<HTMLButtonElement>("play");
const scrub = $<HTMLInputElement>("scrub");
const bindRoot = $<HTMLInputElement>("bind-root");
const downloadLink = $<HTMLAnchorElement>("download");

const panels: Array<{ key: "source" | "result" | "target"; canvas: HTMLCanvasElement }> = [
  { key: "source", canvas: $("canvas-source") },
  { key: "result", canvas: $("canvas-result") },
  { key: "target", canvas: $("canvas-target") },
];
const cameras = new Map<string, Camera>();

interface ConfigControl {
  id: string;
  field: keyof import("./types.js").TransferConfigJson;
  read: (el: HTMLInputElement | HTMLSelectElement) => unknown;
}

// One control per config field; values land on the service via PUT.
const CONFIG_CONTROLS: ConfigControl[] = [
  { id: "cfg-alpha", field: "alpha", read: (el) => parseFloat(el.value) },
  { id: "cfg-patch", field: "patch_size", read: (el) => parseInt(el.value, 10) },
  { id: "cfg-step", field: "step", read: (el) => parseInt(el.value, 10) },
  { id: "cfg-iterations", field: "iterations", read: (el) => parseInt(el.value, 10) },
  { id: "cfg-pyramid", field: "pyramid_levels", read: (el) => parseInt(el.value, 10) },
  { id: "cfg-feature", field: "feature_mode", read: (el) => el.value },
  { id: "cfg-seed", field: "seed", read: (el) => parseInt(el.value, 10) },
  { id: "cfg-normalize", field: "normalize", read: (el) => (el as HTMLInputElement).checked },
];

function setStatus(text: string, isError = false): void {
  statusEl.textContent = text;
  statusEl.className = isError ? "error" : "";
}

function showError(err: unknown): void {
  if (err instanceof ApiError) setStatus(`${err.error}: ${err.message}`, true);
  else setStatus(String(err), true);
}

async function withService(action: () => Promise<void>): Promise<void> {
  try {
    await action();
    setStatus("ready");
  } catch (err) {
    showError(err);
  }
  renderAll();
}

function adopt(summary: import("./types.js").SessionSummary): void {
  state = fromSummary(summary, state);
  if (!state.hasResult) {
    feed = null;
    metrics = null;
  }
  location.hash = state.sessionId ?? "";
}

// ---------------------------------------------------------------- session

async function startSession(): Promise<void> {
  const wanted = location.hash.replace(/^#/, "");
  if (wanted) {
    try {
      adopt(await api.summary(wanted));
      if (state.hasResult && state.source) await loadResult(state.source.frames);
      setStatus(`restored session ${wanted}`);
      return;
    } catch {
      // stale hash; fall through to a fresh session
    }
  }
  const sid = await api.createSession();
  adopt(await api.summary(sid));
  setStatus(`new session ${sid}`);
}

// ---------------------------------------------------------------- uploads

async function uploadSource(file: File): Promise<void> {
  adopt(await api.uploadSource(state.sessionId!, file.name, file));
}

async function uploadTargets(files: FileList): Promise<void> {
  const payload = Array.from(files).map((f) => ({ name: f.name, data: f as Blob }));
  adopt(await api.uploadTargets(state.sessionId!, payload));
}

// ---------------------------------------------------------------- binding

async function pushBindings(): Promise<void> {
  adopt(await api.putBindings(state.sessionId!, toJson(state.editor)));
}

function onSourceJointClick(name: string): void {
  state = { ...state, editor: clickSourceJoint(state.editor, name) };
  renderAll();
}

function onTargetJointClick(name: string): void {
  const before = state.editor.pairs;
  state = { ...state, editor: clickTargetJoint(state.editor, name) };
  if (state.editor.pairs !== before) void withService(pushBindings);
  else renderAll();
}

async function runAutobind(): Promise<void> {
  const length = parseInt($<HTMLInputElement>("chain-length").value, 10);
  const topK = parseInt($<HTMLInputElement>("top-k").value, 10);
  proposals = await api.autobind(state.sessionId!, length, topK);
}

async function acceptAll(): Promise<void> {
  state = { ...state, editor: acceptProposals(state.editor, proposals) };
  await pushBindings();
  proposals = [];
}

// --------------------------------------------------------------- transfer

async function loadResult(frames: number): Promise<void> {
  feed = await api.frames(state.sessionId!, 0, frames);
  metrics = await api.metrics(state.sessionId!);
  cameras.clear();
}

async function runTransfer(): Promise<void> {
  state = beginTransfer(state);
  renderAll();
  try {
    const job = await api.transfer(state.sessionId!);
    lastEnergy = job.energy;
    await loadResult(job.frames);
    state = finishTransfer(state, true);
    clock = { ...clock, playing: true };
    setStatus(`job ${job.job}: ${job.status}`);
  } catch (err) {
    state = finishTransfer(state, state.hasResult);
    throw err;
  }
}

// ---------------------------------------------------------------- config

async function pushConfig(field: string, value: unknown): Promise<void> {
  adopt(await api.putConfig(state.sessionId!, { [field]: value }));
}

// --------------------------------------------------------------- drawing

function jointHighlights(kind: "source" | "target", joints: string[]): Map<number, string> {
  const colors = new Map<number, string>();
  state.editor.pairs.forEach((pair, i) => {
    const name = kind === "source" ? pair.source : pair.target;
    const idx = joints.indexOf(name);
    if (idx >= 0) colors.set(idx, pairColor(i));
  });
  if (kind === "source" && state.editor.pendingSource !== null) {
    const idx = joints.indexOf(state.editor.pendingSource);
    if (idx >= 0) colors.set(idx, "#ffffff");
  }
  return colors;
}

function drawPanel(key: "source" | "result" | "target", canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#14161c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!feed) return;
  const block: PositionsBlock = feed[key];
  let camera = cameras.get(key);
  if (!camera) {
    camera = fitCamera(worldBounds(block.frames), canvas.width, canvas.height);
    cameras.set(key, camera);
  }
  const idx = panelFrame(clock.cursor, block.frames.length);
  const parents = blockParents(key);
  const highlight =
    key === "source"
      ? jointHighlights("source", block.joints)
      : key === "target"
        ? jointHighlights("target", block.joints)
        : undefined;
  drawFrame(ctx, block.frames[idx], boneSegments(parents), camera, {
    bone: "#8a93a6",
    joint: "#d7dce6",
    jointRadius: 3.5,
    highlight,
  });
}

function blockParents(key: "source" | "result" | "target"): number[] {
  if (key === "source") return state.source?.parents ?? [];
  return state.target?.parents ?? [];
}

function tick(now: number): void {
  if (feed && state.source) {
    clock = advance(clock, (now - lastTick) / 1000, feed.source.frame_time, state.source.frames);
    if (clock.playing) {
      scrub.value = String(Math.floor(clock.cursor));
      frameLabel.textContent = `frame ${Math.floor(clock.cursor)} / ${state.source.frames}`;
    }
  }
  lastTick = now;
  for (const { key, canvas } of panels) drawPanel(key, canvas);
  requestAnimationFrame(tick);
}
let lastTick = performance.now();

// -------------------------------------------------------------- rendering

function jointTree(container: HTMLElement, kind: "source" | "target"): void {
  const block = kind === "source" ? state.source : state.target;
  container.textContent = "";
  if (!block) {
    container.textContent = "(no clip loaded)";
    return;
  }
  const depth = block.parents.map((_, j) => {
    let d = 0;
    for (let p = block.parents[j]; p >= 0; p = block.parents[p]) d++;
    return d;
  });
  const bound = new Map<string, number>();
  state.editor.pairs.forEach((pair, i) =>
    bound.set(kind === "source" ? pair.source : pair.target, i),
  );
  block.joints.forEach((name, j) => {
    const btn = document.createElement("button");
    btn.textContent = name;
    btn.className = "joint";
    btn.style.marginLeft = `${depth[j] * 12}px`;
    const pairIdx = bound.get(name);
    if (pairIdx !== undefined) btn.style.borderColor = pairColor(pairIdx);
    if (kind === "source" && state.editor.pendingSource === name) btn.classList.add("armed");
    btn.onclick = () =>
      kind === "source" ? onSourceJointClick(name) : onTargetJointClick(name);
    container.appendChild(btn);
    container.appendChild(document.createElement("br"));
  });
}

function renderPairs(): void {
  pairsList.textContent = "";
  state.editor.pairs.forEach((pair, i) => {
    const row = document.createElement("div");
    row.className = "pair";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = pairColor(i);
    row.appendChild(swatch);
    row.appendChild(document.createTextNode(` ${pair.source} → ${pair.target}`));
    pairsList.appendChild(row);
  });
  if (state.source && state.target) {
    const rate = bindingRate(
      state.editor.pairs.length,
      state.source.joints.length,
      state.target.joints.length,
    );
    rateLabel.textContent = `binding rate ${rate.toFixed(2)}%`;
  } else {
    rateLabel.textContent = "";
  }
}

function renderProposals(): void {
  proposalsEl.textContent = "";
  if (proposals.length === 0) return;
  proposals.forEach((p) => {
    const row = document.createElement("div");
    const names = p.pairs.map((pair) => `${pair.source}→${pair.target}`).join(", ");
    row.textContent = `score ${p.score.toFixed(3)}: ${names}`;
    proposalsEl.appendChild(row);
  });
  const btn = document.createElement("button");
  btn.textContent = "Accept all";
  btn.onclick = () => void withService(acceptAll);
  proposalsEl.appendChild(btn);
}

function renderConfig(): void {
  const enabled = controlsEnabled(state);
  for (const control of CONFIG_CONTROLS) {
    const el = $<HTMLInputElement>(control.id);
    const value = state.config[control.field];
    if (el.type === "checkbox") el.checked = Boolean(value);
    else el.value = String(value);
    el.disabled = !enabled;
  }
  $("cfg-alpha-value").textContent = state.config.alpha.toFixed(2);
}

function renderAll(): void {
  sessionLabel.textContent = state.sessionId ?? "-";
  sourceInfo.textContent = state.source
    ? `${state.source.joints.length} joints, ${state.source.frames} frames`
    : "none";
  targetInfo.textContent = state.target
    ? `${state.target.joints.length} joints, ${state.target.frames} frames, ` +
      `${state.nTargets} example(s)`
    : "none";
  jointTree(sourceJoints, "source");
  jointTree(targetJoints, "target");
  renderPairs();
  renderProposals();
  renderConfig();
  bindRoot.checked = state.editor.bindRootVelocity;
  bindRoot.disabled = !controlsEnabled(state);

  const blocker = transferBlocker(state);
  transferBtn.disabled = !canTransfer(state);
  transferBtn.title = blocker ?? "run the transfer";
  transferBtn.textContent = state.busy
    ? "Transferring…"
    : state.hasResult
      ? "Re-transfer"
      : "Transfer";

  energyLabel.textContent = lastEnergy.length
    ? `energy ${lastEnergy.map((e) => e.toFixed(3)).join(" → ")}`
    : "";
  metricsEl.textContent = metrics
    ? `fid ${metrics.fid === null ? "n/a" : metrics.fid.toFixed(4)}   ` +
      `freq-align ${metrics.freq_align.toFixed(1)}%   ` +
      `binding-rate ${metrics.binding_rate.toFixed(2)}%`
    : "";

  const frames = state.source ? state.source.frames : 0;
  scrub.max = String(Math.max(frames - 1, 0));
  scrub.disabled = !feed;
  playBtn.disabled = !feed;
  playBtn.textContent = clock.playing ? "Pause" : "Play";
  if (!feed) frameLabel.textContent = "";

  downloadLink.style.display = state.hasResult ? "inline" : "none";
  downloadLink.href = state.sessionId ? api.resultBvhUrl(state.sessionId) : "#";
}

// ----------------------------------------------------------------- wiring

function wire(): void {
  $<HTMLInputElement>("source-file").onchange = (e) => {
    const input = e.target as HTMLInputElement;
    if (input.files?.[0]) void withService(() => uploadSource(input.files![0]));
  };
  $<HTMLInputElement>("targets-file").onchange = (e) => {
    const input = e.target as HTMLInputElement;
    if (input.files?.length) void withService(() => uploadTargets(input.files!));
  };
  $("autobind").onclick = () => void withService(runAutobind);
  bindRoot.onchange = () => {
    state = { ...state, editor: setBindRootVelocity(state.editor, bindRoot.checked) };
    if (state.editor.pairs.length > 0) void withService(pushBindings);
  };
  transferBtn.onclick = () => {
    if (canTransfer(state)) void withService(runTransfer);
  };
  for (const control of CONFIG_CONTROLS) {
    const el = $<HTMLInputElement>(control.id);
    el.onchange = () => void withService(() => pushConfig(control.field, control.read(el)));
    if (control.id === "cfg-alpha") {
      el.oninput = () => ($("cfg-alpha-value").textContent = parseFloat(el.value).toFixed(2));
    }
  }
  playBtn.onclick = () => {
    clock = togglePlay(clock);
    renderAll();
  };
  scrub.oninput = () => {
    if (!state.source) return;
    clock = scrubTo({ ...clock, playing: false }, parseInt(scrub.value, 10), state.source.frames);
    frameLabel.textContent = `frame ${Math.floor(clock.cursor)} / ${state.source.frames}`;
    renderAll();
  };
  $("new-session").onclick = () => {
    location.hash = "";
    void withService(async () => {
      state = initialState();
      feed = null;
      metrics = null;
      proposals = [];
      lastEnergy = [];
      await startSession();
    });
  };
  for (const { key, canvas } of panels) {
    if (key === "result") continue;
    canvas.onclick = (e) => {
      if (!feed) return;
      const camera = cameras.get(key);
      if (!camera) return;
      const rect = canvas.getBoundingClientRect();
      const block = feed[key];
      const idx = panelFrame(clock.cursor, block.frames.length);
      const j = pickJoint(block.frames[idx], camera, e.clientX - rect.left, e.clientY - rect.top);
      if (j < 0) return;
      if (key === "source") onSourceJointClick(block.joints[j]);
      else onTargetJointClick(block.joints[j]);
    };
  }
}

void (async () => {
  wire();
  await withService(startSession);
  requestAnimationFrame(tick);
})();
