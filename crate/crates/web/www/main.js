import init, { adversarialRun, bracketCurve, boundCurves } from "./pkg/greedy_sparse_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

// Log-scale y axis, linear m axis.
function plot(section, m, series) {
  const canvas = section.querySelector("canvas");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 45;
  ctx.clearRect(0, 0, width, height);

  const values = series.flatMap((s) => s.data).filter((v) => v > 0);
  if (values.length === 0 || m.length === 0) return;
  const lo = Math.log10(Math.min(...values));
  const hi = Math.log10(Math.max(...values));
  const span = hi - lo || 1;
  const mMax = Math.max(...m, 2);
  const x = (k) => pad + ((k - 1) / (mMax - 1 || 1)) * (width - 2 * pad);
  const y = (v) => height - pad - ((Math.log10(v) - lo) / span) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(`1e${hi.toFixed(1)}`, 2, pad + 4);
  ctx.fillText(`1e${lo.toFixed(1)}`, 2, height - pad);
  ctx.fillText("m = 1", pad, height - pad + 15);
  ctx.fillText(`m = ${mMax}`, width - pad - 30, height - pad + 15);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.beginPath();
    let started = false;
    s.data.forEach((v, j) => {
      if (!(v > 0)) return;
      if (started) ctx.lineTo(x(m[j]), y(v));
      else ctx.moveTo(x(m[j]), y(v));
      started = true;
    });
    ctx.stroke();
  });
  ctx.setLineDash([]);
  section.querySelector(".legend").innerHTML = series
    .map((s, i) => `<span style="color:${COLORS[i % COLORS.length]}">&#9632; ${s.name}</span>`)
    .join("");
}

function inputs(section) {
  const v = {};
  section.querySelectorAll("input, select").forEach((el) => {
    v[el.name] = el.type === "number" ? Number(el.value) : el.value;
  });
  return v;
}

function wire(id, render) {
  const section = document.getElementById(id);
  const run = () => {
    try {
      render(section, inputs(section));
    } catch (e) {
      section.querySelector(".legend").innerHTML = `<span class="err">${e}</span>`;
    }
  };
  section.querySelectorAll("input, select").forEach((el) => el.addEventListener("change", run));
  run();
}

await init();

wire("adversarial", (section, v) => {
  const c = JSON.parse(adversarialRun(v.algorithm, v.policy, v.steps, v.delta));
  plot(section, c.m, [
    { name: "residual", data: c.residual },
    { name: "formula", data: c.exact, dashed: true },
  ]);
});

wire("bracket", (section, v) => {
  const c = JSON.parse(bracketCurve(v.q, v.steps));
  plot(section, c.m, [
    { name: "projection error", data: c.sigma },
    { name: "lower", data: c.lower, dashed: true },
    { name: "upper", data: c.upper, dashed: true },
  ]);
});

wire("bounds", (section, v) => {
  const c = JSON.parse(boundCurves(v.algorithm, v.q, v.tau, v.seed, v.steps));
  plot(section, c.m, [
    { name: "residual", data: c.residual },
    { name: "a-posteriori", data: c.aposteriori, dashed: true },
    { name: "a-priori", data: c.apriori, dashed: true },
  ]);
});
