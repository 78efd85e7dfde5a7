import init, { learning_curve, minority_sweep, disparity_by_features } from "./pkg/featbandit_wasm.js";

const $ = (id) => document.getElementById(id);
const NC = "#d9480f", CTX = "#1c7ed6";

for (const id of ["trials", "curve-f", "curve-m", "sweep-f", "disp-h"]) {
  $(id).addEventListener("input", () => { $(id + "-out").value = $(id).value; });
}

function axes(ctx, w, h, pad, yMax, xLabels) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, 10); ctx.lineTo(pad, h - pad); ctx.lineTo(w - 10, h - pad);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const v = (yMax * i) / 4;
    const y = h - pad - ((h - pad - 10) * i) / 4;
    ctx.fillText(v.toFixed(2), 4, y + 4);
  }
  xLabels.forEach(([x, text]) => ctx.fillText(text, x - 8, h - pad + 16));
}

function line(ctx, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ys.forEach((y, i) => (i ? ctx.lineTo(xs[i], y) : ctx.moveTo(xs[i], y)));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function smooth(values, k) {
  return values.map((_, i) => {
    const lo = Math.max(0, i - k), hi = Math.min(values.length, i + k + 1);
    let s = 0;
    for (let j = lo; j < hi; j++) s += values[j];
    return s / (hi - lo);
  });
}

function timed(fn) {
  const t0 = performance.now();
  try {
    fn();
    $("status").textContent = `done in ${((performance.now() - t0) / 1000).toFixed(2)} s`;
  } catch (e) {
    $("status").textContent = `error: ${e.message ?? e}`;
  }
}

function drawCurve() {
  const horizon = 250;
  const v = learning_curve($("scenario").value, +$("curve-f").value, +$("curve-m").value, horizon, +$("trials").value, 1);
  const c = $("curve"), ctx = c.getContext("2d"), pad = 36;
  const xs = Array.from({ length: horizon }, (_, t) => pad + ((c.width - pad - 10) * t) / (horizon - 1));
  const y = (p) => c.height - pad - (c.height - pad - 10) * p;
  axes(ctx, c.width, c.height, pad, 1, [[pad, "1"], [c.width - 20, String(horizon)]]);
  line(ctx, xs, smooth(Array.from(v.slice(0, horizon)), 5).map(y), NC);
  line(ctx, xs, smooth(Array.from(v.slice(horizon)), 5).map(y), CTX);
}

function drawSweep() {
  const v = minority_sweep($("scenario").value, +$("sweep-f").value, +$("trials").value, 2);
  const c = $("sweep"), ctx = c.getContext("2d"), pad = 36;
  const props = [0.1, 0.2, 0.3, 0.4, 0.5];
  const xs = props.map((_, i) => pad + 40 + ((c.width - pad - 90) * i) / 4);
  const y = (p) => c.height - pad - (c.height - pad - 10) * p;
  axes(ctx, c.width, c.height, pad, 1, props.map((p, i) => [xs[i], p.toFixed(1)]));
  line(ctx, xs, props.map((_, i) => y(v[2 * i])), NC);
  line(ctx, xs, props.map((_, i) => y(v[2 * i + 1])), CTX);
}

function drawDisparity() {
  const v = disparity_by_features($("scenario").value, +$("disp-h").value, Math.min(+$("trials").value, 200), 3);
  const c = $("disp"), ctx = c.getContext("2d"), pad = 36;
  const fs = [2, 3, 5, 7, 8, 10];
  const xs = fs.map((f) => pad + 20 + ((c.width - pad - 60) * (f - 2)) / 8);
  const y = (p) => c.height - pad - (c.height - pad - 10) * p;
  axes(ctx, c.width, c.height, pad, 1, fs.map((f, i) => [xs[i], `F=${f}`]));
  ctx.fillStyle = CTX;
  fs.forEach((_, i) => {
    const m = v[2 * i], se = v[2 * i + 1];
    ctx.fillRect(xs[i] - 12, y(m), 24, y(0) - y(m));
    ctx.strokeStyle = "#333";
    ctx.beginPath(); ctx.moveTo(xs[i], y(m - 2 * se)); ctx.lineTo(xs[i], y(m + 2 * se)); ctx.stroke();
  });
}

await init();
$("status").textContent = "ready";
$("curve-run").addEventListener("click", () => timed(drawCurve));
$("sweep-run").addEventListener("click", () => timed(drawSweep));
$("disp-run").addEventListener("click", () => timed(drawDisparity));
timed(drawCurve);
