/**
 * Browser entry point: wires the websocket client, the input mapper, the
 * palm view and the trial flow to the page.
 *
 * URL parameters: ?server=ws://host:port/ws  &scale=1  &maxSpeed=0.45
 */

import { connectWebSocket, type TrialClient } from "./client.js";
import { InputMapper } from "./input.js";
import { PalmView } from "./palm_view.js";
import { parseStimulusPoints } from "./protocol.js";
import { TrialFlow } from "./trial_flow.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const params = new URLSearchParams(location.search);
const wsUrl = params.get("server")
  ?? `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const scale = Number(params.get("scale") ?? "1");
const maxSpeed = Number(params.get("maxSpeed") ?? "0.45");

const canvas = el<HTMLCanvasElement>("palm");
const ctx = canvas.getContext("2d")!;
const statusLine = el<HTMLElement>("status");
const lostBadge = el<HTMLElement>("lost");
const echoLine = el<HTMLElement>("echo");
const resultsList = el<HTMLElement>("results");
const connectBtn = el<HTMLButtonElement>("connect");
const startBtn = el<HTMLButtonElement>("start");
const reachedBtn = el<HTMLButtonElement>("reached");
const downloadLink = el<HTMLAnchorElement>("download");

const flow = new TrialFlow();
const view = new PalmView(40);
const input = new InputMapper({ scale, maxSpeed });

// Local dead-reckoned echo of the hand, relative to the trial start point.
let echo: [number, number, number] = [0, 0, 0];
let client: TrialClient | null = null;
let dragging = false;
let lastSent = performance.now();

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function refreshButtons(): void {
  startBtn.disabled = !(client && (flow.state === "connected"));
  reachedBtn.disabled = flow.state !== "running";
  downloadLink.style.display = flow.records.length > 0 ? "inline" : "none";
}

function addResultCard(): void {
  const r = flow.records[flow.records.length - 1];
  if (!r) return;
  const li = document.createElement("li");
  const verdict = r.completed ? "completed" : "timed out";
  li.textContent = `trial ${flow.records.length}: ${verdict}, `
    + `err 3D ${r.eps_xyz.toFixed(1)} mm, lateral ${r.eps_xy.toFixed(1)} mm, `
    + `${r.duration.toFixed(1)} s`;
  resultsList.appendChild(li);
  const blob = new Blob([flow.toCsv()], { type: "text/csv" });
  downloadLink.href = URL.createObjectURL(blob);
}

function connect(): void {
  client = connectWebSocket(wsUrl);
  setStatus(`connecting to ${wsUrl} ...`);
  client.onOpen = () => {
    client!.hello();
    setStatus("connected; waiting for session info");
  };
  client.onClose = () => {
    setStatus("disconnected");
    flow.state = "disconnected";
    refreshButtons();
  };
  client.onFrame = (frame) => {
    const kind = flow.handleFrame(frame);
    if (kind === "hello") {
      setStatus(`session ${flow.info?.session}: ${flow.info?.trialCount} trials, `
        + `${flow.info?.timeoutS}s timeout`);
    } else if (kind === "start_trial") {
      echo = [0, 0, 0];
      input.reset();
      view.reset(performance.now());
      setStatus(`trial ${flow.trialIndex} of ${flow.info?.trialCount ?? "?"}: `
        + "find the apex by feel");
    } else if (kind === "stimulus") {
      view.update(parseStimulusPoints(frame), performance.now(),
        Number(frame.payload.active_slot ?? 0));
    } else if (kind === "trial_result") {
      addResultCard();
      setStatus(flow.state === "finished"
        ? `set complete: ${flow.completedCount()}/${flow.records.length} trials completed`
        : "trial finished; start the next one");
    } else if (kind === "abort") {
      setStatus(`session aborted: ${flow.abortReason}`);
    }
    refreshButtons();
  };
}

connectBtn.addEventListener("click", () => connect());
startBtn.addEventListener("click", () => client?.startTrial());
reachedBtn.addEventListener("click", () => client?.reached());

canvas.addEventListener("pointerdown", (e) => {
  dragging = true;
  canvas.setPointerCapture(e.pointerId);
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});
canvas.addEventListener("pointermove", (e) => {
  if (dragging && flow.state === "running") {
    input.addPointer(e.movementX, e.movementY);
  }
});
canvas.addEventListener("wheel", (e) => {
  if (flow.state === "running") {
    input.addWheel(e.deltaY);
    e.preventDefault();
  }
}, { passive: false });

function tick(now: number): void {
  const dt = Math.min((now - lastSent) / 1000, 0.25);
  if (flow.state === "running" && client && dt >= 1 / 30) {
    const delta = input.flush(dt);
    lastSent = now;
    if (delta) {
      client.move(delta);
      echo = [echo[0] + delta[0], echo[1] + delta[1], echo[2] + delta[2]];
    }
  } else if (dt >= 1 / 30) {
    lastSent = now;
  }
  view.draw(ctx, canvas.width, canvas.height);
  lostBadge.style.display =
    flow.state === "running" && view.isLost(now) ? "inline" : "none";
  echoLine.textContent = `hand (rel. start): x ${echo[0].toFixed(0)} mm, `
    + `y ${echo[1].toFixed(0)} mm, z ${echo[2].toFixed(0)} mm`;
  requestAnimationFrame(tick);
}

refreshButtons();
requestAnimationFrame(tick);
