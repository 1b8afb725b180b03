// Drives the three demo panels against the wasm bindings. Build the wasm
// package into ./pkg first (see the repository README).

import init, { speed_curve, wave_profile, Invasion } from "./pkg/nlwave_wasm.js";

const $ = (id) => document.getElementById(id);
const css = (name) => getComputedStyle(document.documentElement).getPropertyValue(name).trim();

function model() {
  return {
    a: parseFloat($("a").value),
    b: parseFloat($("b").value),
    d: parseFloat($("d").value),
    kind: $("kind").value,
    kparam: parseFloat($("kparam").value),
  };
}

// --- minimal plotting -------------------------------------------------------

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const m = { l: 52, r: 14, t: 12, b: 26 };
  ctx.clearRect(0, 0, W, H);

  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.x.length; i++) {
      const x = s.x[i], y = s.y[i];
      if (!isFinite(x) || !isFinite(y)) continue;
      if (x < x0) x0 = x; if (x > x1) x1 = x;
      if (y < y0) y0 = y; if (y > y1) y1 = y;
    }
  }
  if (opts.ymin !== undefined) y0 = opts.ymin;
  if (opts.ymax !== undefined) y1 = opts.ymax;
  if (!(y1 > y0)) { y1 = y0 + 1; }
  const pad = 0.06 * (y1 - y0);
  y0 -= pad; y1 += pad;

  const sx = (x) => m.l + (x - x0) / (x1 - x0) * (W - m.l - m.r);
  const sy = (y) => H - m.b - (y - y0) / (y1 - y0) * (H - m.t - m.b);

  ctx.strokeStyle = "#2c333b";
  ctx.fillStyle = css("--dim");
  ctx.font = "11px system-ui";
  ctx.lineWidth = 1;
  const xticks = 8, yticks = 5;
  for (let i = 0; i <= xticks; i++) {
    const x = x0 + (x1 - x0) * i / xticks;
    ctx.beginPath(); ctx.moveTo(sx(x), m.t); ctx.lineTo(sx(x), H - m.b); ctx.stroke();
    ctx.fillText(x.toPrecision(3), sx(x) - 10, H - 8);
  }
  for (let i = 0; i <= yticks; i++) {
    const y = y0 + (y1 - y0) * i / yticks;
    ctx.beginPath(); ctx.moveTo(m.l, sy(y)); ctx.lineTo(W - m.r, sy(y)); ctx.stroke();
    ctx.fillText(y.toPrecision(3), 4, sy(y) + 4);
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 2;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < s.x.length; i++) {
      const x = s.x[i], y = s.y[i];
      if (!isFinite(x) || !isFinite(y)) { pen = false; continue; }
      const [px, py] = [sx(x), sy(y)];
      if (pen) ctx.lineTo(px, py); else { ctx.moveTo(px, py); pen = true; }
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }

  for (const mk of opts.markers || []) {
    ctx.fillStyle = mk.color;
    ctx.beginPath();
    ctx.arc(sx(mk.x), sy(mk.y), 4, 0, 2 * Math.PI);
    ctx.fill();
    if (mk.label) {
      ctx.fillText(mk.label, sx(mk.x) + 6, sy(mk.y) - 6);
    }
  }
  for (const vl of opts.vlines || []) {
    ctx.strokeStyle = vl.color;
    ctx.setLineDash([4, 4]);
    ctx.beginPath(); ctx.moveTo(sx(vl.x), m.t); ctx.lineTo(sx(vl.x), H - m.b); ctx.stroke();
    ctx.setLineDash([]);
  }
}

// --- panel 1: speed ---------------------------------------------------------

function runSpeed() {
  const p = model();
  const ratio = parseFloat($("ratio1").value);
  const ro = $("ro-speed");
  try {
    const out = JSON.parse(speed_curve(p.a, p.b, p.d, p.kind, p.kparam, ratio, 400));
    const markers = [{ x: out.lambda_star, y: out.s_star, color: css("--accent"), label: "s*" }];
    const vlines = [];
    if (out.lambda1 !== null && out.lambda2 !== null) {
      vlines.push({ x: out.lambda1, color: css("--pred") }, { x: out.lambda2, color: css("--pred") });
    }
    const sLine = { x: [out.lambda[0], out.lambda[out.lambda.length - 1]], y: [out.s, out.s], color: css("--pred"), width: 1, dash: [6, 4] };
    plot($("cv-speed"), [
      { x: out.lambda, y: out.objective, color: css("--accent") },
      sLine,
    ], { markers, vlines, ymax: out.s_star * 2.2 });
    const roots = out.lambda1 !== null
      ? `λ₁ = <b>${out.lambda1.toFixed(6)}</b>, λ₂ = <b>${out.lambda2.toFixed(6)}</b> at s = ${out.s.toFixed(6)}`
      : `at s = s* the minimizer is a double root`;
    ro.innerHTML = `s* = <b>${out.s_star.toFixed(9)}</b> at λ* = <b>${out.lambda_star.toFixed(6)}</b> — ${roots}`;
  } catch (e) {
    ro.innerHTML = `<span class="err">${e}</span>`;
  }
}

// --- panel 2: wave ----------------------------------------------------------

function runWave() {
  const p = model();
  const ratio = parseFloat($("ratio2").value);
  const halfw = parseFloat($("halfw").value);
  const ro = $("ro-wave");
  ro.textContent = "solving…";
  setTimeout(() => {
    try {
      const n = Math.max(2000, Math.round(halfw * 100));
      const out = JSON.parse(wave_profile(p.a, p.b, p.d, p.kind, p.kparam, ratio, halfw, n));
      const bound = (y) => ({ x: out.z, y, color: css("--bound"), width: 1 });
      plot($("cv-wave"), [
        bound(out.phi_upper), bound(out.phi_lower), bound(out.psi_upper), bound(out.psi_lower),
        { x: out.z, y: out.phi, color: css("--prey") },
        { x: out.z, y: out.psi, color: css("--pred") },
      ], { ymin: 0, ymax: 1.05 });
      ro.innerHTML =
        `${out.critical ? "critical wave s = s*" : "supercritical wave"} at s = <b>${out.s.toFixed(9)}</b>` +
        ` — residual (${out.residual[0].toExponential(1)}, ${out.residual[1].toExponential(1)})` +
        ` after <b>${out.iterations}</b> sweeps`;
    } catch (e) {
      ro.innerHTML = `<span class="err">${e}</span>`;
    }
  }, 30);
}

// --- panel 3: invasion ------------------------------------------------------

let sim = null;
let running = false;

function drawSim() {
  if (!sim) return;
  const u = sim.prey(), v = sim.predator();
  const xmax = sim.x_max();
  const xs = Array.from({ length: u.length }, (_, i) => i * xmax / (u.length - 1));
  plot($("cv-sim"), [
    { x: xs, y: Array.from(u), color: css("--prey") },
    { x: xs, y: Array.from(v), color: css("--pred") },
  ], { ymin: 0, ymax: 1.1, vlines: [{ x: sim.front(), color: css("--accent") }] });
  const measured = sim.measured_speed();
  const sstar = sim.minimal_speed();
  const pct = isFinite(measured) ? ` (${(100 * (measured - sstar) / sstar).toFixed(2)}% of s*)` : "";
  $("ro-sim").innerHTML =
    `t = <b>${sim.time().toFixed(1)}</b>, front at <b>${sim.front().toFixed(2)}</b>, ` +
    `measured speed <b>${isFinite(measured) ? measured.toFixed(4) : "…"}</b>${pct}, s* = ${sstar.toFixed(4)}`;
}

function tick() {
  if (!sim || !running) return;
  try {
    sim.advance(6);
    drawSim();
    if (sim.front() < 0.9 * sim.x_max()) {
      requestAnimationFrame(tick);
    } else {
      running = false;
      $("pause-sim").disabled = true;
    }
  } catch (e) {
    $("ro-sim").innerHTML = `<span class="err">${e}</span>`;
    running = false;
  }
}

function startSim() {
  const p = model();
  try {
    sim = new Invasion(p.a, p.b, p.d, p.kind, p.kparam,
      parseFloat($("xmax").value), parseFloat($("hsim").value));
    running = true;
    $("pause-sim").disabled = false;
    $("reset-sim").disabled = false;
    $("pause-sim").textContent = "Pause";
    requestAnimationFrame(tick);
  } catch (e) {
    $("ro-sim").innerHTML = `<span class="err">${e}</span>`;
  }
}

// --- wiring -----------------------------------------------------------------

async function main() {
  await init();
  $("go-speed").addEventListener("click", runSpeed);
  $("ratio1").addEventListener("input", () => {
    $("ratio1v").textContent = parseFloat($("ratio1").value).toFixed(2);
    runSpeed();
  });
  $("go-wave").addEventListener("click", runWave);
  $("ratio2").addEventListener("input", () => {
    $("ratio2v").textContent = parseFloat($("ratio2").value).toFixed(2);
  });
  $("go-sim").addEventListener("click", startSim);
  $("pause-sim").addEventListener("click", () => {
    running = !running;
    $("pause-sim").textContent = running ? "Pause" : "Resume";
    if (running) requestAnimationFrame(tick);
  });
  $("reset-sim").addEventListener("click", () => {
    running = false;
    sim = null;
    $("pause-sim").disabled = true;
    $("ro-sim").textContent = "";
    const cv = $("cv-sim");
    cv.getContext("2d").clearRect(0, 0, cv.width, cv.height);
  });
  runSpeed();
}

main();
