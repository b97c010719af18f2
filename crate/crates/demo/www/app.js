import init, { model, optimize, factors, pattern } from "./pkg/mmx_demo.js";

const $ = (id) => document.getElementById(id);
const fmt = (v, d = 2) => v.toLocaleString("en-US", { minimumFractionDigits: d, maximumFractionDigits: d });

function call(fn, errorEl) {
  try {
    errorEl.textContent = "";
    return JSON.parse(fn());
  } catch (e) {
    const text = typeof e === "string" ? e : String(e);
    try {
      errorEl.textContent = JSON.parse(text).message;
    } catch {
      errorEl.textContent = text;
    }
    return null;
  }
}

let view;

function buildChannels() {
  const box = $("channels");
  box.innerHTML = "";
  view.variables.forEach((v, j) => {
    const row = document.createElement("label");
    row.innerHTML = `<span>${v.name}</span>`;
    for (const side of ["lower", "upper"]) {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "0.5";
      input.id = `${side}-${v.name}`;
      input.value = side === "lower" ? view.default_lower[j] : view.default_upper[j];
      input.addEventListener("input", runScenario);
      row.appendChild(input);
    }
    box.appendChild(row);
  });
}

function scenarioRequest() {
  const lower = {}, upper = {};
  for (const v of view.variables) {
    lower[v.name] = Number($(`lower-${v.name}`).value);
    upper[v.name] = Number($(`upper-${v.name}`).value);
  }
  const constraints = [{ kind: "z_sum", label: "sum_z", sense: "le", bound: Number($("budget").value) }];
  return JSON.stringify({ lower, upper, constraints });
}

function drawBars(names, values) {
  const c = $("bars"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...values.map(Math.abs), 1);
  const mid = c.height / 2, bw = c.width / names.length;
  g.font = "12px system-ui";
  g.textAlign = "center";
  g.fillStyle = "#888";
  g.fillRect(0, mid, c.width, 1);
  names.forEach((name, j) => {
    const h = (values[j] / max) * (mid - 24);
    g.fillStyle = values[j] >= 0 ? "#2f6fb0" : "#c0504d";
    g.fillRect(j * bw + 6, mid - Math.max(h, 0), bw - 12, Math.abs(h));
    g.fillStyle = "#222";
    g.fillText(name, j * bw + bw / 2, values[j] >= 0 ? mid + 14 : mid - 6);
  });
}

function runScenario() {
  const r = call(() => optimize(scenarioRequest()), $("scenario-error"));
  if (!r) return;
  $("objective").textContent = fmt(r.solution.objective_value);
  $("volume").textContent = fmt(r.predicted_volume);
  drawBars(r.solution.names, r.solution.contributions);
}

function runFactors() {
  const k = Number($("k").value);
  const v = call(() => factors(k, $("kaiser").checked), $("factor-error"));
  if (!v) return;
  $("factor-summary").textContent =
    `${v.k} component(s), ${fmt(v.cumulative_pct, 3)}% of variance, ${v.sweeps_used} rotation sweep(s)`;
  const head = Array.from({ length: v.k }, (_, c) => `<th>Factor${c + 1}</th>`).join("");
  const rows = v.names.map((name, i) => {
    const cells = v.rotated[i].map((x) => {
      const a = Math.min(Math.abs(x), 1);
      return `<td style="background: rgba(47,111,176,${a * 0.6})">${fmt(x, 3)}</td>`;
    }).join("");
    return `<tr><td>${name}</td>${cells}</tr>`;
  }).join("");
  $("loadings").innerHTML = `<tr><th></th>${head}</tr>${rows}`;
}

function arrow(g, x1, y1, x2, y2, directed) {
  const r = 22, a = Math.atan2(y2 - y1, x2 - x1);
  const sx = x1 + r * Math.cos(a), sy = y1 + r * Math.sin(a);
  const ex = x2 - r * Math.cos(a), ey = y2 - r * Math.sin(a);
  g.beginPath();
  g.moveTo(sx, sy);
  g.lineTo(ex, ey);
  g.stroke();
  if (!directed) return;
  g.beginPath();
  g.moveTo(ex, ey);
  g.lineTo(ex - 10 * Math.cos(a - 0.4), ey - 10 * Math.sin(a - 0.4));
  g.lineTo(ex - 10 * Math.cos(a + 0.4), ey - 10 * Math.sin(a + 0.4));
  g.closePath();
  g.fill();
}

function runPattern() {
  const alpha = Math.pow(10, Number($("alpha").value));
  $("alpha-value").textContent = alpha.toPrecision(2);
  const v = call(() => pattern(alpha, Number($("n").value), $("stable").checked), $("pattern-error"));
  if (!v) return;
  const c = $("graph"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const cx = c.width / 2, cy = c.height / 2, R = c.width / 2 - 50;
  const pos = {};
  v.names.forEach((name, i) => {
    const t = (2 * Math.PI * i) / v.names.length - Math.PI / 2;
    pos[name] = [cx + R * Math.cos(t), cy + R * Math.sin(t)];
  });
  g.strokeStyle = g.fillStyle = "#444";
  g.lineWidth = 1.5;
  for (const e of v.edges) arrow(g, ...pos[e.from], ...pos[e.to], e.directed);
  g.font = "13px system-ui";
  g.textAlign = "center";
  g.textBaseline = "middle";
  for (const [name, [x, y]] of Object.entries(pos)) {
    g.fillStyle = "#fff";
    g.beginPath();
    g.arc(x, y, 20, 0, 2 * Math.PI);
    g.fill();
    g.stroke();
    g.fillStyle = "#222";
    g.fillText(name, x, y);
  }
}

await init();
view = JSON.parse(model());
buildChannels();
$("budget").addEventListener("input", runScenario);
$("reset").addEventListener("click", () => { buildChannels(); $("budget").value = 30; runScenario(); });
$("k").addEventListener("change", runFactors);
$("kaiser").addEventListener("change", runFactors);
for (const id of ["alpha", "n", "stable"]) $(id).addEventListener("input", runPattern);
runScenario();
runFactors();
runPattern();
