/**
 * Canvas wiring for the annotation workbench. All geometry and workflow
 * logic lives in transform.ts / state.ts / api.ts; this file only moves
 * events in and pixels out.
 */

import { AnnotationClient, ApiError, type SessionInfo } from "./api.js";
import {
  addClick,
  advanceSelection,
  applyError,
  applyResult,
  cancelPending,
  initialState,
  runningMeanAbsError,
  shadowReady,
  toggleVerticalCollection,
  undoClick,
  verticalEdgePx,
  type ViewState,
} from "./state.js";
import {
  IDENTITY,
  imageToScreen,
  panBy,
  screenToImage,
  zoomAt,
  type Point,
  type Transform,
} from "./transform.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const status = document.getElementById("status")!;
const banner = document.getElementById("banner")!;
const imageInput = document.getElementById("image-id") as HTMLInputElement;
const openButton = document.getElementById("open") as HTMLButtonElement;
const refineButton = document.getElementById("refine") as HTMLButtonElement;
const verticalToggle = document.getElementById("vertical") as HTMLInputElement;

const client = new AnnotationClient(window.location.origin);

let session: SessionInfo | null = null;
let state: ViewState = initialState([]);
let view: Transform = IDENTITY;
let image: HTMLImageElement | null = null;
let hover: Point | null = null;
let submitting = false;

function setState(next: ViewState): void {
  state = next;
  render();
}

function canvasPoint(event: MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

function boxRectPx(index: number): [number, number, number, number] | null {
  if (!session) return null;
  const box = state.boxes[index];
  if (!box) return null;
  const x0 = (box.cx - box.w / 2) * session.width;
  const y0 = (box.cy - box.h / 2) * session.height;
  return [x0, y0, box.w * session.width, box.h * session.height];
}

function render(): void {
  ctx.fillStyle = "#202124";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (image && session) {
    ctx.save();
    ctx.setTransform(view.zoom, 0, 0, view.zoom, view.panX, view.panY);
    ctx.imageSmoothingEnabled = view.zoom < 4;
    ctx.drawImage(image, 0, 0);
    ctx.restore();

    for (let i = 0; i < state.boxes.length; i++) {
      const rect = boxRectPx(i);
      if (!rect) continue;
      const tl = imageToScreen({ x: rect[0], y: rect[1] }, view);
      const w = rect[2] * view.zoom;
      const h = rect[3] * view.zoom;
      const done = state.annotated.get(i);
      ctx.strokeStyle = i === state.selected ? "#ffd54f" : done ? "#66bb6a" : "#4fc3f7";
      ctx.lineWidth = i === state.selected ? 2 : 1;
      ctx.strokeRect(tl.x, tl.y, w, h);
      if (done) {
        ctx.fillStyle = "#66bb6a";
        ctx.font = "12px sans-serif";
        const err = done.abs_error_m !== undefined
          ? ` (err ${done.abs_error_m.toFixed(1)})` : "";
        ctx.fillText(`${done.est_height_m.toFixed(1)} m${err}`, tl.x + 2, tl.y - 4);
      }
    }

    ctx.strokeStyle = "#ff7043";
    ctx.fillStyle = "#ff7043";
    ctx.lineWidth = 2;
    for (const p of state.pending) {
      const s = imageToScreen(p, view);
      ctx.beginPath();
      ctx.arc(s.x, s.y, 4, 0, Math.PI * 2);
      ctx.fill();
    }
    const first = state.pending[0];
    if (first && state.pending.length === 1 && hover) {
      const a = imageToScreen(first, view);
      ctx.setLineDash([6, 4]);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(hover.x, hover.y);
      ctx.stroke();
      ctx.setLineDash([]);
    }
    const [p0, p1] = state.pending;
    if (p0 && p1) {
      const a = imageToScreen(p0, view);
      const b = imageToScreen(p1, view);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
  }

  banner.textContent = state.banner ?? "";
  banner.style.display = state.banner ? "block" : "none";
  const mean = runningMeanAbsError(state);
  const parts = [];
  if (session) {
    parts.push(`image ${session.image_id}`);
    parts.push(`building ${state.selected + 1}/${state.boxes.length}`);
    parts.push(`annotated ${state.annotated.size}`);
    if (mean !== null) parts.push(`mean |err| ${mean.toFixed(2)} m`);
    if (session.resolved_time) parts.push(`time ${session.resolved_time}`);
  } else {
    parts.push("open an image to begin");
  }
  status.textContent = parts.join("  |  ");
}

async function submit(): Promise<void> {
  if (!session || !shadowReady(state) || submitting) return;
  const [start, end] = state.pending as [Point, Point];
  submitting = true;
  try {
    const result = await client.submitAnnotation(
      session.session_id,
      state.selected,
      [start.x, start.y],
      [end.x, end.y],
      verticalEdgePx(state),
    );
    setState(applyResult(state, result));
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    setState(applyError(state, message));
  } finally {
    submitting = false;
  }
}

canvas.addEventListener("click", (event) => {
  if (!session) return;
  const p = screenToImage(canvasPoint(event), view);
  const next = addClick(state, p);
  setState(next);
  if (shadowReady(next) && (!next.collectVertical || next.verticalPending.length === 2)) {
    void submit();
  }
});

canvas.addEventListener("mousemove", (event) => {
  hover = canvasPoint(event);
  render();
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const factor = event.deltaY < 0 ? 1.25 : 0.8;
  view = zoomAt(view, canvasPoint(event), factor);
  render();
}, { passive: false });

let dragging: Point | null = null;
canvas.addEventListener("mousedown", (event) => {
  if (event.button === 1 || event.shiftKey) {
    dragging = canvasPoint(event);
    event.preventDefault();
  }
});
window.addEventListener("mousemove", (event) => {
  if (!dragging) return;
  const p = canvasPoint(event);
  view = panBy(view, p.x - dragging.x, p.y - dragging.y);
  dragging = p;
  render();
});
window.addEventListener("mouseup", () => { dragging = null; });

window.addEventListener("keydown", (event) => {
  if (event.key === "Escape") {
    setState(cancelPending(state));
  } else if (event.key === "Backspace") {
    setState(undoClick(state));
    event.preventDefault();
  } else if (event.key === "Tab") {
    setState(advanceSelection(state));
    event.preventDefault();
  }
});

verticalToggle.addEventListener("change", () => {
  setState(toggleVerticalCollection(state));
});

openButton.addEventListener("click", async () => {
  try {
    session = await client.openSession(imageInput.value.trim());
    state = initialState(session.boxes, session.cursor);
    view = IDENTITY;
    image = new Image();
    image.onload = () => render();
    image.src = client.imageUrl(session.image_id);
    render();
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    setState(applyError(state, message));
  }
});

refineButton.addEventListener("click", async () => {
  if (!session) return;
  try {
    const fit = await client.refineTime(session.session_id);
    session.resolved_time = fit.best_time;
    setState(applyError(state, ""));
    setState(cancelPending(state));
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    setState(applyError(state, message));
  }
});

render();
