import init, { spectrum, zeta_prime, gradient } from "./pkg/torsion_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x, d = 8) => (Number.isFinite(x) ? x.toPrecision(d) : String(x));

function table(head, rows) {
  const t = document.createElement("table");
  t.insertRow().append(...head.map((h) => Object.assign(document.createElement("th"), { textContent: h })));
  for (const r of rows) {
    const tr = t.insertRow();
    for (const c of r) tr.insertCell().textContent = c;
  }
  return t;
}

// Runs `f` after the status line has repainted; errors from the module are shown inline.
function wire(prefix, f) {
  $(`${prefix}-run`).addEventListener("click", () => {
    const status = $(`${prefix}-status`);
    const out = $(`${prefix}-out`);
    status.textContent = "computing…";
    status.classList.remove("error");
    setTimeout(() => {
      const t0 = performance.now();
      try {
        out.replaceChildren(...f());
        status.textContent = `${(performance.now() - t0).toFixed(0)} ms`;
      } catch (e) {
        status.textContent = e.message ?? String(e);
        status.classList.add("error");
      }
    }, 20);
  });
}

wire("sp", () => {
  const m = num("sp-m");
  const r = JSON.parse(spectrum($("sp-kind").value, m, num("sp-p"), num("sp-n"), 8, num("sp-max")));
  const info = document.createElement("p");
  info.textContent = `kernel dimension ${r.kernel_dim} (holomorphic sections: ${m + 1}), cutoff λ < ${fmt(r.cutoff, 5)}`;
  const rows = r.groups.map((g, i) => [i + 1, fmt(g.lambda), g.multiplicity, g.modes.join(" ")]);
  return [info, table(["group", "λ", "multiplicity", "modes"], rows)];
});

wire("zp", () => {
  const list = $("zp-list").value.split(/[\s,;]+/).filter(Boolean).map(Number);
  const r = JSON.parse(zeta_prime(Float64Array.from(list)));
  const rows = [
    ["ζ′(0) from the heat trace", fmt(r.zeta_prime0, 12)],
    ["−Σ log λ", fmt(r.exact, 12)],
    ["difference", fmt(r.zeta_prime0 - r.exact, 3)],
    ["ζ(0) = b₀", fmt(r.b0, 10)],
    ["fit residual", fmt(r.fit_residual, 3)],
  ];
  return [table(["quantity", "value"], rows)];
});

wire("gr", () => {
  const r = JSON.parse(gradient(num("gr-cr"), num("gr-ci"), num("gr-zr"), num("gr-zi"), num("gr-n")));
  const rows = r.map((x) => [x.n, fmt(x.dlog_h, 12), fmt(x.grad_ratio, 8)]);
  return [table(["n", "|∂ψₙ(z)|", "gradient ratio"], rows)];
});

await init();
for (const b of document.querySelectorAll("button")) b.disabled = false;
