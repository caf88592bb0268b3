import init, { compare, snapshot, sinkPath } from "./pkg/wsnsim_web.js";

const COLORS = { leach: "#1f77b4", teen: "#ff7f0e", deec: "#2ca02c", hteen: "#d62728", campteen: "#9467bd" };
const $ = (id) => document.getElementById(id);

function status(msg) {
  $("status").textContent = msg || "";
}

function plot(canvas, runs, key, title) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xmax = Math.max(...runs.map((r) => r.rounds[r.rounds.length - 1])) || 1;
  const ymax = Math.max(...runs.flatMap((r) => r[key])) || 1;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 10, w - pad - 10, h - pad - 10);
  ctx.fillStyle = "#333";
  ctx.fillText(title, pad + 4, 22);
  ctx.fillText(String(ymax), 2, 16);
  ctx.fillText("0", pad - 10, h - pad + 12);
  ctx.fillText(String(xmax), w - 40, h - pad + 12);
  const sx = (x) => pad + (x / xmax) * (w - pad - 10);
  const sy = (y) => h - pad - (y / ymax) * (h - pad - 20);
  runs.forEach((r, i) => {
    ctx.strokeStyle = COLORS[r.protocol];
    ctx.beginPath();
    r.rounds.forEach((x, j) => (j ? ctx.lineTo(sx(x), sy(r[key][j])) : ctx.moveTo(sx(x), sy(r[key][j]))));
    ctx.stroke();
    ctx.fillStyle = COLORS[r.protocol];
    ctx.fillText(r.protocol, w - 80, 30 + 14 * i);
  });
}

function table(runs) {
  const head = "<tr><th>protocol</th><th>first death</th><th>avg alive</th><th>throughput</th><th>avg throughput</th></tr>";
  const rows = runs.map((r) => {
    const s = r.summary;
    return `<tr><td>${r.protocol}</td><td>${s.stability_period ?? "-"}</td><td>${s.avg_alive.toFixed(2)}</td>` +
      `<td>${s.total_throughput}</td><td>${s.avg_throughput.toFixed(1)}</td></tr>`;
  });
  $("cmp-table").innerHTML = head + rows.join("");
}

function runCompare() {
  try {
    const runs = JSON.parse(compare($("cmp-sink").value, +$("cmp-nodes").value, +$("cmp-rounds").value, +$("cmp-seed").value));
    plot($("alive"), runs, "alive", "alive nodes");
    plot($("thr"), runs, "throughput", "packets to sink (cumulative)");
    table(runs);
    status();
  } catch (e) {
    status(e.message ?? String(e));
  }
}

function drawField() {
  const round = +$("fv-round").value;
  $("fv-round-label").textContent = round;
  try {
    const sink = $("fv-sink").value;
    const snap = JSON.parse(snapshot($("fv-protocol").value, sink, 100, round, +$("cmp-seed").value));
    const trail = JSON.parse(sinkPath(sink, round));
    const c = $("field"), ctx = c.getContext("2d");
    const s = (c.width - 20) / snap.field;
    const px = (x) => 10 + x * s, py = (y) => c.height - 10 - y * s;
    ctx.clearRect(0, 0, c.width, c.height);
    ctx.strokeStyle = "#ccc";
    ctx.strokeRect(px(0), py(snap.field), snap.field * s, snap.field * s);
    ctx.strokeStyle = "#bbb";
    snap.nodes.forEach((n) => {
      if (n.cluster_of !== null && n.alive) {
        const h = snap.nodes[n.cluster_of];
        ctx.beginPath();
        ctx.moveTo(px(n.x), py(n.y));
        ctx.lineTo(px(h.x), py(h.y));
        ctx.stroke();
      }
    });
    snap.nodes.forEach((n) => {
      ctx.fillStyle = !n.alive ? "#ccc" : n.head ? "#d62728" : `hsl(210, 70%, ${75 - 45 * n.energy}%)`;
      ctx.beginPath();
      ctx.arc(px(n.x), py(n.y), n.head ? 5 : 3, 0, 2 * Math.PI);
      ctx.fill();
    });
    ctx.strokeStyle = "#2ca02c";
    ctx.beginPath();
    trail.slice(-30).forEach(([x, y], j) => (j ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
    ctx.stroke();
    ctx.fillStyle = "#2ca02c";
    ctx.fillRect(px(snap.sink[0]) - 5, py(snap.sink[1]) - 5, 10, 10);
    status();
  } catch (e) {
    status(e.message ?? String(e));
  }
}

await init();
$("cmp-run").addEventListener("click", runCompare);
["fv-round", "fv-protocol", "fv-sink"].forEach((id) => $(id).addEventListener("input", drawField));
runCompare();
drawField();
