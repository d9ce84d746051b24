import init, { lambdaTable, scanFigure, simulate } from "./pkg/am2cascade_demo.js";

const $ = (id) => document.getElementById(id);
const val = (id) => parseFloat($(id).value);

function fail(el, e) {
  el.innerHTML = `<span class="err">${e.message ?? e}</span>`;
}

function showLambda() {
  const out = $("lambda");
  try {
    const t = JSON.parse(lambdaTable($("preset").value, val("l-d"), val("l-r"), val("l-s2")));
    out.innerHTML = Object.entries(t).map(([k, v]) => `<tr><th>${k}</th><td>${v}</td></tr>`).join("");
  } catch (e) {
    fail(out, e);
  }
}

function showDiagram() {
  const status = $("d-status");
  status.textContent = "scanning...";
  // Let the status paint before the synchronous scan.
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = scanFigure($("fig").value, Math.round(val("grid")));
      const img = new ImageData(new Uint8ClampedArray(r.rgba()), r.width, r.height);
      const off = new OffscreenCanvas(r.width, r.height);
      off.getContext("2d").putImageData(img, 0, 0);
      const ctx = $("raster").getContext("2d");
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(off, 0, 0, 480, 480);
      const rows = JSON.parse(r.legend());
      const byJ = new Map();
      for (const row of rows) {
        const key = row.J ?? row.pattern;
        const prev = byJ.get(key);
        byJ.set(key, { ...row, cells: (prev?.cells ?? 0) + row.cells });
      }
      $("legend").innerHTML = [...byJ.values()]
        .sort((a, b) => b.cells - a.cells)
        .map((row) => `<tr><td style="background:${row.color}"></td><td>${row.J === null ? "?" : "J" + row.J}</td><td><code>${row.pattern}</code></td><td>${row.cells}</td></tr>`)
        .join("");
      status.textContent = `${byJ.size} signatures, ${(performance.now() - t0).toFixed(0)} ms`;
      r.free();
    } catch (e) {
      fail(status, e);
    }
  }, 10);
}

function showTrajectory() {
  const status = $("t-status");
  try {
    const tr = JSON.parse(simulate($("preset").value, val("t-d"), val("t-r"), val("t-s1"), val("t-s2"),
      BigInt(Math.round(val("t-seed"))), val("t-tmax"), 400));
    status.textContent = tr.event;
    const c = $("traj"), ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    // Biomass components X1^1, X2^1, X1^2, X2^2.
    const series = [1, 3, 5, 7];
    const colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
    const tmax = tr.t[tr.t.length - 1] || 1;
    const ymax = Math.max(1e-9, ...tr.states.flatMap((s) => series.map((k) => s[k])));
    series.forEach((k, n) => {
      ctx.strokeStyle = colors[n];
      ctx.beginPath();
      tr.t.forEach((t, i) => {
        const x = 40 + (t / tmax) * (c.width - 50);
        const y = c.height - 20 - (tr.states[i][k] / ymax) * (c.height - 30);
        i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
      });
      ctx.stroke();
      ctx.fillStyle = colors[n];
      ctx.fillText(["X1^1", "X2^1", "X1^2", "X2^2"][n], c.width - 50, 15 + 14 * n);
    });
    ctx.fillStyle = "#000";
    ctx.fillText(`t = ${tmax.toPrecision(4)}`, c.width - 90, c.height - 5);
    ctx.fillText(ymax.toPrecision(3), 2, 15);
  } catch (e) {
    fail(status, e);
  }
}

await init();
$("l-go").onclick = showLambda;
$("d-go").onclick = showDiagram;
$("t-go").onclick = showTrajectory;
showLambda();
showTrajectory();
