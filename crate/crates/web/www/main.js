import init, { kernel, Session } from "./pkg/bemfem_web.js";

const $ = (id) => document.getElementById(id);

function fit(canvas, [x0, y0, x1, y1]) {
  const pad = 10;
  const s = Math.min((canvas.width - 2 * pad) / (x1 - x0), (canvas.height - 2 * pad) / (y1 - y0));
  return {
    scale: s,
    to: (x, y) => [pad + (x - x0) * s, canvas.height - pad - (y - y0) * s],
    from: (px, py) => [x0 + (px - pad) / s, y0 + (canvas.height - pad - py) / s],
  };
}

function path(ctx, view, flat) {
  ctx.beginPath();
  for (let i = 0; i < flat.length; i += 2) {
    const [px, py] = view.to(flat[i], flat[i + 1]);
    i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
  }
  ctx.closePath();
}

// colour map from blue (0) to red (1)
function heat(t) {
  const c = Math.max(0, Math.min(1, t));
  return `rgb(${Math.round(255 * c)}, ${Math.round(80 + 100 * (1 - Math.abs(2 * c - 1)))}, ${Math.round(255 * (1 - c))})`;
}

// polygon kernel

const polyCanvas = $("poly");
const polyView = fit(polyCanvas, [0, 0, 1, 1]);
let vertices = [];

function drawPolygon() {
  const ctx = polyCanvas.getContext("2d");
  ctx.clearRect(0, 0, polyCanvas.width, polyCanvas.height);
  if (vertices.length >= 6) {
    path(ctx, polyView, vertices);
    ctx.strokeStyle = "#222";
    ctx.stroke();
  }
  ctx.fillStyle = "#222";
  for (let i = 0; i < vertices.length; i += 2) {
    const [px, py] = polyView.to(vertices[i], vertices[i + 1]);
    ctx.fillRect(px - 2, py - 2, 4, 4);
  }
  if (vertices.length < 6) {
    $("poly-info").textContent = "";
    return;
  }
  let out;
  try {
    out = kernel(new Float64Array(vertices));
  } catch (e) {
    $("poly-info").textContent = String(e);
    return;
  }
  const [cx, cy, r] = out;
  if (r <= 0) {
    $("poly-info").textContent = "not star-shaped";
    return;
  }
  path(ctx, polyView, out.slice(3));
  ctx.fillStyle = "rgba(40, 120, 220, 0.3)";
  ctx.fill();
  const [px, py] = polyView.to(cx, cy);
  ctx.beginPath();
  ctx.arc(px, py, r * polyView.scale, 0, 2 * Math.PI);
  ctx.strokeStyle = "#c30";
  ctx.stroke();
  $("poly-info").textContent = `centre (${cx.toFixed(4)}, ${cy.toFixed(4)}), radius ${r.toFixed(4)}`;
}

polyCanvas.addEventListener("click", (ev) => {
  const rect = polyCanvas.getBoundingClientRect();
  vertices.push(...polyView.from(ev.clientX - rect.left, ev.clientY - rect.top));
  drawPolygon();
});
$("poly-clear").onclick = () => { vertices = []; drawPolygon(); };
$("poly-star").onclick = () => {
  vertices = [];
  for (let i = 0; i < 10; i++) {
    const a = (i * Math.PI) / 5 + Math.PI / 2;
    const r = i % 2 === 0 ? 0.45 : 0.2;
    vertices.push(0.5 + r * Math.cos(a), 0.5 + r * Math.sin(a));
  }
  drawPolygon();
};

// adaptive session

const meshCanvas = $("mesh");
let session = null;

function drawMesh() {
  const ctx = meshCanvas.getContext("2d");
  ctx.clearRect(0, 0, meshCanvas.width, meshCanvas.height);
  const view = fit(meshCanvas, Array.from(session.domain()));
  const m = JSON.parse(session.mesh());
  if ($("show-field").checked) {
    const n = 100;
    const v = session.sample(n, n);
    const finite = v.filter(Number.isFinite);
    const lo = Math.min(...finite), hi = Math.max(...finite);
    const [dx0, dy0, dx1, dy1] = Array.from(session.domain());
    const cw = ((dx1 - dx0) / n) * view.scale, ch = ((dy1 - dy0) / n) * view.scale;
    for (let j = 0; j < n; j++) {
      for (let i = 0; i < n; i++) {
        const val = v[j * n + i];
        if (!Number.isFinite(val)) continue;
        const [px, py] = view.to(dx0 + (i * (dx1 - dx0)) / n, dy0 + ((j + 1) * (dy1 - dy0)) / n);
        ctx.fillStyle = heat((val - lo) / (hi - lo || 1));
        ctx.fillRect(px, py, cw + 0.5, ch + 0.5);
      }
    }
  } else if (m.eta.length) {
    const logs = m.eta.map((e) => Math.log10(Math.max(e, 1e-300)));
    const hi = Math.max(...logs), lo = Math.max(Math.min(...logs), hi - 6);
    m.polygons.forEach((p, k) => {
      path(ctx, view, p);
      ctx.fillStyle = heat((logs[k] - lo) / (hi - lo || 1));
      ctx.fill();
    });
  }
  const marked = new Set(m.marked);
  m.polygons.forEach((p, k) => {
    path(ctx, view, p);
    ctx.lineWidth = marked.has(k) ? 2 : 0.5;
    ctx.strokeStyle = marked.has(k) ? "#000" : "#444";
    ctx.stroke();
  });
  ctx.lineWidth = 1;
}

const fmt = (v) => (v === null || v === undefined ? "-" : Math.abs(v) < 1e-2 || Math.abs(v) >= 1e4 ? v.toExponential(3) : v.toFixed(4));

function addRow(r) {
  const tr = document.createElement("tr");
  for (const v of [r.step, r.elements, r.dof, fmt(r.eta), fmt(r.delta), fmt(r.error), fmt(r.eoc), r.marked]) {
    const td = document.createElement("td");
    td.textContent = v;
    tr.appendChild(td);
  }
  $("history").tBodies[0].appendChild(tr);
}

function reset() {
  if (session) session.free();
  session = new Session($("problem").value, Number($("order").value), Number($("theta").value));
  $("history").tBodies[0].innerHTML = "";
  step(1);
}

function step(count) {
  try {
    for (let i = 0; i < count; i++) addRow(JSON.parse(session.step()));
    $("status").textContent = "";
  } catch (e) {
    $("status").textContent = String(e);
  }
  drawMesh();
}

$("reset").onclick = reset;
$("step").onclick = () => step(1);
$("run5").onclick = () => step(5);
$("show-field").onchange = drawMesh;

init().then(() => {
  $("poly-star").onclick();
  reset();
}).catch((e) => { $("status").textContent = `failed to load the wasm module: ${e}`; });
