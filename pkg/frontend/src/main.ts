// Browser entry point: wires the socket, view model, pointer capture,
// and the animation loop together.  All real logic lives in the
// imported modules; this file only touches the DOM.

import { parseServerMsg } from "./protocol.js";
import { ViewModel } from "./viewModel.js";
import { Viewport } from "./view.js";
import { render, type RenderOptions } from "./render.js";
import { DragSender } from "./pointer.js";
import { ReconnectingSocket } from "./socket.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const overlay = document.getElementById("overlay") as HTMLDivElement;
const heightSlider = document.getElementById("height") as HTMLInputElement;
const heightLabel = document.getElementById("height-label") as HTMLSpanElement;
const protInput = document.getElementById("protective") as HTMLInputElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws") ?? `ws://${window.location.hostname || "127.0.0.1"}:8700/ws`;

const vm = new ViewModel();
const vp = new Viewport();
const drag = new DragSender();
const opts: RenderOptions = {
  dProtective: parseFloat(protInput.value) || 0.05,
  heightZ: 0,
};

const sock = new ReconnectingSocket(
  wsUrl,
  (url) => new WebSocket(url) as unknown as import("./socket.js").SocketLike,
  (text) => {
    const msg = parseServerMsg(text);
    if (msg !== null) vm.apply(msg);
  },
  (up) => {
    vm.setConnected(up);
    overlay.style.display = up ? "none" : "flex";
  },
);
sock.connect();

function fitCanvas(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  vp.resize(canvas.width, canvas.height);
}
window.addEventListener("resize", fitCanvas);
fitCanvas();

// -- pointer capture --------------------------------------------------------

function canvasPoint(ev: PointerEvent): { x: number; y: number } {
  const r = canvas.getBoundingClientRect();
  return { x: ev.clientX - r.left, y: ev.clientY - r.top };
}

canvas.addEventListener("pointerdown", (ev) => {
  const f = vm.frame;
  if (f === null || f.obstacles.length === 0) return;
  const w = vp.toWorld(canvasPoint(ev));
  // grab the nearest obstacle; there is usually exactly one
  let best = f.obstacles[0];
  let bestD = Infinity;
  for (const ob of f.obstacles) {
    const d = Math.hypot(ob.x - w.x, ob.y - w.y);
    if (d < bestD) {
      bestD = d;
      best = ob;
    }
  }
  canvas.setPointerCapture(ev.pointerId);
  drag.begin(best.id, w);
});

canvas.addEventListener("pointermove", (ev) => {
  if (!drag.dragging) return;
  drag.move(vp.toWorld(canvasPoint(ev)));
});

canvas.addEventListener("pointerup", () => drag.end());
canvas.addEventListener("pointercancel", () => drag.end());

// -- controls ---------------------------------------------------------------

heightSlider.addEventListener("input", () => {
  const z = parseFloat(heightSlider.value);
  drag.setHeight(z);
  opts.heightZ = z;
  heightLabel.textContent = z.toFixed(2);
});

protInput.addEventListener("change", () => {
  const v = parseFloat(protInput.value);
  if (Number.isFinite(v) && v >= 0) opts.dProtective = v;
});

resetBtn.addEventListener("click", () => {
  sock.send({ type: "reset" });
});

document.getElementById("retry")?.addEventListener("click", () => {
  sock.close();
  sock.connect();
});

// -- animation loop ---------------------------------------------------------

const ctx = canvas.getContext("2d");
if (ctx === null) throw new Error("2d canvas context unavailable");

function tick(): void {
  // at most one obstacle message per animation frame
  const cmd = drag.flush();
  if (cmd !== null) sock.send(cmd);
  render(ctx as unknown as import("./render.js").Scene2D, vm, vp, opts);
  requestAnimationFrame(tick);
}
requestAnimationFrame(tick);
