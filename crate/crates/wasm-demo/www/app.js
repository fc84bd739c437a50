import init, { egcEvaluate, mstnStep, rankSpots } from "./pkg/concierge_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => {
  const v = $(id).value.trim();
  return v === "" ? undefined : Number(v);
};

function cell(row, text, tag = "td") {
  const c = document.createElement(tag);
  c.textContent = text;
  row.appendChild(c);
}

function fill(table, header, rows) {
  table.replaceChildren();
  const head = table.insertRow();
  header.forEach((h) => cell(head, h, "th"));
  rows.forEach((r) => {
    const tr = table.insertRow();
    r.forEach((v) => cell(tr, v));
  });
}

const fmt = (x) => (x === null || x === undefined ? "-" : Number(x).toFixed(3));

let lastGroups = null;

function evaluate() {
  try {
    const out = JSON.parse(egcEvaluate($("frame").value, $("context").value, $("fv").value, Number($("beta").value)));
    lastGroups = out.groups;
    $("evaluate-out").classList.remove("err");
    $("evaluate-out").textContent = JSON.stringify(out, null, 2);
  } catch (e) {
    $("evaluate-out").classList.add("err");
    $("evaluate-out").textContent = String(e);
  }
}

function step(chain) {
  $("step-out").textContent = "";
  try {
    const out = JSON.parse(mstnStep($("state").value, $("groups").value));
    $("step-summary").textContent = out.group === null
      ? `No stimulus: stays ${out.from}.`
      : `${out.from} -> ${out.to} via group e${out.group}.`;
    fill($("step-table"), ["group", "strength", "target", "cost", "score"],
      out.groups.map((g) => [`e${g.group}`, fmt(g.strength), g.target, fmt(g.cost), fmt(g.score)]));
    if (chain) $("state").value = out.to;
  } catch (e) {
    $("step-out").textContent = String(e);
  }
}

function rank() {
  $("rank-out").textContent = "";
  try {
    const out = JSON.parse(rankSpots($("profile").value, num("lat"), num("lon"), num("radius")));
    fill($("rank-table"), ["#", "spot", "emotion distance", "km"],
      out.map((s, i) => [i + 1, s.name, fmt(s.emotion_distance), fmt(s.distance_km)]));
  } catch (e) {
    $("rank-out").textContent = String(e);
  }
}

await init();
$("evaluate").onclick = evaluate;
$("to-step").onclick = () => {
  if (lastGroups) $("groups").value = JSON.stringify(lastGroups);
};
$("step").onclick = () => step(false);
$("chain").onclick = () => step(true);
$("rank").onclick = rank;
