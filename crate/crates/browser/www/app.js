import init, { dismantling_curves, score_expression, mock_evolution } from "./pkg/critnode_browser.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function graphArgs() {
  const paste = document.querySelector("input[name=src]:checked").value === "paste";
  return [paste ? $("edges").value : "", +$("ba-n").value, +$("ba-m").value, BigInt($("ba-seed").value || 0)];
}

function guarded(errEl, fn) {
  return () => {
    errEl.textContent = "";
    try {
      fn();
    } catch (e) {
      errEl.textContent = String(e.message || e);
    }
  };
}

function axes(ctx, w, h, pad, xmax, ymin, ymax, xlabel, ylabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad, 10);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - 10, h - pad);
  ctx.stroke();
  ctx.fillText(ylabel, 4, 12);
  ctx.fillText(xlabel, w - 10 - ctx.measureText(xlabel).width, h - 8);
  ctx.fillText(ymax.toFixed(2), 4, 24);
  ctx.fillText(ymin.toFixed(2), 4, h - pad);
  ctx.fillText(String(xmax), w - 40, h - pad + 14);
  return {
    x: (v) => pad + (v / xmax) * (w - pad - 12),
    y: (v) => h - pad - ((v - ymin) / (ymax - ymin || 1)) * (h - pad - 12),
  };
}

function plotCurves(data) {
  const c = $("curve-canvas");
  const ctx = c.getContext("2d");
  const steps = Math.max(...data.curves.map((k) => k.ratios.length));
  const s = axes(ctx, c.width, c.height, 40, steps, 0, 1, "nodes removed", "σ ratio");
  const legend = [];
  data.curves.forEach((curve, i) => {
    const color = COLORS[i % COLORS.length];
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(s.x(0), s.y(1));
    curve.ratios.forEach((r, k) => ctx.lineTo(s.x(k + 1), s.y(r)));
    ctx.stroke();
    legend.push(`<span><span class="swatch" style="background:${color}"></span>${escape(curve.name)}: ANC ${curve.anc.toFixed(5)}</span>`);
  });
  ctx.lineWidth = 1;
  $("curve-legend").innerHTML = `${data.nodes} nodes, ${data.edges} edges<br>` + legend.join("");
}

function escape(s) {
  return s.replace(/[&<>"]/g, (ch) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[ch]);
}

function runCurves() {
  const methods = [...document.querySelectorAll(".method:checked")].map((b) => b.value).join(",");
  const json = dismantling_curves(...graphArgs(), methods, $("curve-expr").value, +$("fraction").value, BigInt($("curve-seed").value || 0));
  plotCurves(JSON.parse(json));
}

function runScore() {
  const out = JSON.parse(score_expression(...graphArgs(), $("score-expr").value, +$("fraction").value, 15));
  const rows = out.top.map((t, i) => `<tr><td>${i + 1}</td><td>${escape(t.label)}</td><td>${t.score.toPrecision(6)}</td></tr>`).join("");
  $("score-out").innerHTML =
    `<div class="mono">${escape(out.canonical)}</div>` +
    `<div>size ${out.size}, depth ${out.depth}; removing the top ${out.removal.length} nodes gives ANC ${out.anc.toFixed(5)}</div>` +
    `<table><tr><th>#</th><th>node</th><th>score</th></tr>${rows}</table>`;
}

function plotEvolution(out) {
  const recs = out.records;
  const best = $("evo-best");
  let ctx = best.getContext("2d");
  const fits = recs.map((r) => r.best.fitness);
  const lo = Math.min(...fits), hi = Math.max(...fits);
  const s = axes(ctx, best.width, best.height, 40, recs.length - 1 || 1, lo - 0.002, hi + 0.002, "epoch", "best fitness");
  ctx.strokeStyle = COLORS[0];
  ctx.lineWidth = 2;
  ctx.beginPath();
  fits.forEach((f, i) => (i ? ctx.lineTo(s.x(i), s.y(f)) : ctx.moveTo(s.x(i), s.y(f))));
  ctx.stroke();
  ctx.lineWidth = 1;

  // heatmap: population (rows) x epoch (columns), colored by max fitness
  const heat = $("evo-heat");
  ctx = heat.getContext("2d");
  ctx.clearRect(0, 0, heat.width, heat.height);
  const pops = Math.max(...recs.map((r) => r.populations.length));
  const all = recs.flatMap((r) => r.populations.map((p) => p.max_fitness));
  const fmin = Math.min(...all), fmax = Math.max(...all);
  const cw = (heat.width - 50) / recs.length, ch = (heat.height - 30) / pops;
  recs.forEach((r, e) =>
    r.populations.forEach((p) => {
      const t = (p.max_fitness - fmin) / (fmax - fmin || 1);
      ctx.fillStyle = `hsl(${240 - 240 * t}, 70%, ${35 + 25 * t}%)`;
      ctx.fillRect(50 + e * cw, 5 + p.id * ch, Math.ceil(cw), Math.ceil(ch));
    }),
  );
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText("population", 2, 14);
  ctx.fillText("epoch →", heat.width - 60, heat.height - 8);
  ctx.fillText(`max fitness per population: ${fmin.toFixed(4)} (blue) … ${fmax.toFixed(4)} (red)`, 50, heat.height - 8);

  const last = recs[recs.length - 1];
  $("evo-summary").innerHTML =
    `best fitness ${out.best.fitness.toFixed(5)} (ANC ${(1 - out.best.fitness).toFixed(5)}), ` +
    `${last.populations.length} populations<br>${escape(out.best.expr)}`;
}

function runEvolution() {
  const json = mock_evolution(...graphArgs(), +$("evo-epochs").value, +$("evo-theta").value, +$("evo-tau").value, BigInt($("evo-seed").value || 0));
  plotEvolution(JSON.parse(json));
}

await init();
$("curve-run").onclick = guarded($("curve-err"), runCurves);
$("score-run").onclick = guarded($("score-err"), runScore);
$("evo-run").onclick = guarded($("evo-err"), runEvolution);
guarded($("curve-err"), runCurves)();
