import init, { decode, idealAcceptance, crashRates } from "./pkg/ftsim_web.js";

const N = 49;
const flips = new Uint8Array(N);

function cells(id, clickable) {
  const grid = document.getElementById(id);
  const out = [];
  for (let q = 0; q < N; q++) {
    const el = document.createElement(clickable ? "button" : "span");
    el.title = `block ${Math.floor(q / 7) + 1}, position ${(q % 7) + 1}`;
    if (clickable) {
      el.addEventListener("click", () => {
        flips[q] ^= 1;
        refresh();
      });
    }
    grid.appendChild(el);
    out.push(el);
  }
  return out;
}

const inputCells = cells("input", true);
const exactCells = cells("exact", false);
const levelCells = cells("level", false);

function paint(list, bits) {
  list.forEach((el, q) => el.classList.toggle("on", bits[q] !== 0));
}

function verdict(id, fails) {
  const el = document.getElementById(id);
  el.textContent = fails ? "logical error" : "corrected";
  el.className = fails ? "bad" : "good";
}

function refresh() {
  const d = decode(flips);
  paint(inputCells, flips);
  paint(exactCells, d.exact);
  paint(levelCells, d.level);
  document.getElementById("syndrome").textContent = Array.from(d.syndrome).join(" ");
  verdict("exact-verdict", d.exactFails);
  verdict("level-verdict", d.levelFails);
}

document.getElementById("clear").addEventListener("click", () => {
  flips.fill(0);
  refresh();
});

// Log-log plot of several series: [{points: [[x, y, lo, hi]], color, line}].
function plot(canvas, series, xRange, yRange, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 45;
  ctx.clearRect(0, 0, w, h);
  const lx = (x) => pad + ((Math.log10(x) - Math.log10(xRange[0])) / (Math.log10(xRange[1]) - Math.log10(xRange[0]))) * (w - 2 * pad);
  const ly = (y) => h - pad - ((Math.log10(y) - Math.log10(yRange[0])) / (Math.log10(yRange[1]) - Math.log10(yRange[0]))) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(xLabel, w / 2 - 10, h - 10);
  ctx.fillText(yLabel, 5, pad - 10);
  for (const x of [xRange[0], xRange[1]]) ctx.fillText(x.toExponential(0), lx(x) - 12, h - pad + 15);
  for (const y of [yRange[0], yRange[1]]) ctx.fillText(y.toExponential(0), 2, ly(y) + 4);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    const pts = s.points.filter((p) => p[1] > 0);
    if (s.line) {
      ctx.beginPath();
      pts.forEach((p, i) => (i ? ctx.lineTo(lx(p[0]), ly(p[1])) : ctx.moveTo(lx(p[0]), ly(p[1]))));
      ctx.stroke();
      continue;
    }
    for (const [x, y, lo, hi] of pts) {
      ctx.beginPath();
      ctx.arc(lx(x), ly(y), 3, 0, 2 * Math.PI);
      ctx.fill();
      if (lo !== undefined) {
        ctx.beginPath();
        ctx.moveTo(lx(x), ly(Math.max(lo, yRange[0])));
        ctx.lineTo(lx(x), ly(Math.min(hi, yRange[1])));
        ctx.stroke();
      }
    }
  }
}

function table(id, header, rows) {
  const t = document.getElementById(id);
  t.innerHTML = "";
  const tr = t.insertRow();
  header.forEach((h) => (tr.appendChild(document.createElement("th")).textContent = h));
  for (const r of rows) {
    const row = t.insertRow();
    r.forEach((v) => (row.insertCell().textContent = v));
  }
}

const nextFrame = () => new Promise((r) => requestAnimationFrame(() => setTimeout(r, 0)));

document.getElementById("acc-run").addEventListener("click", async () => {
  const n = Number(document.getElementById("acc-n").value);
  const gammas = [1e-3, 2e-3, 3e-3, 5e-3, 1e-2, 2e-2, 3e-2];
  const rows = [];
  const measured = [];
  for (const [i, g] of gammas.entries()) {
    const [m, e, se] = idealAcceptance(g, n, 1000 + i);
    measured.push([g, m, m - 2 * se, m + 2 * se]);
    rows.push([g.toExponential(1), m.toFixed(5), e.toFixed(5), ((m - e) / se).toFixed(2)]);
    table("acc-table", ["gamma", "measured", "closed form", "z"], rows);
    await nextFrame();
  }
  const curve = [];
  for (let k = 0; k <= 60; k++) {
    const g = 1e-3 * Math.pow(30, k / 60);
    curve.push([g, Math.pow(1 - 0.75 * g, 49)]);
  }
  plot(
    document.getElementById("acc-plot"),
    [
      { points: curve, color: "#888", line: true },
      { points: measured, color: "#2c7fb8" },
    ],
    [1e-3, 3e-2],
    [0.3, 1],
    "gamma",
    "acceptance",
  );
});

document.getElementById("cr-run").addEventListener("click", async () => {
  const scheme = document.getElementById("cr-scheme").value;
  const n = Number(document.getElementById("cr-n").value);
  const gammas = [5e-4, 1e-3, 2e-3, 4e-3, 8e-3];
  const pts = [];
  const rows = [];
  for (const g of gammas) {
    const [rate, lo, hi] = crashRates(scheme, new Float64Array([g]), n, 7);
    pts.push([g, rate, lo, hi]);
    rows.push([g.toExponential(1), rate.toExponential(3), `[${lo.toExponential(2)}, ${hi.toExponential(2)}]`]);
    table("cr-table", ["gamma", "crash rate", "95% interval"], rows);
    await nextFrame();
  }
  plot(
    document.getElementById("cr-plot"),
    [
      { points: [[5e-4, 0.75 * 5e-4], [8e-3, 0.75 * 8e-3]], color: "#888", line: true },
      { points: pts, color: "#c0392b" },
    ],
    [5e-4, 8e-3],
    [1e-5, 1],
    "gamma",
    "crash rate",
  );
});

init().then(() => {
  document.getElementById("status").textContent = "";
  refresh();
});
