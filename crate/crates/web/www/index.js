import init, { example, runQuery, summarizeQbs, summarizeGbs } from "./pkg/graph_squash_web.js";

const $ = (id) => document.getElementById(id);
const output = $("output");

function show(fn) {
  output.classList.remove("error");
  try {
    const result = JSON.parse(fn());
    output.textContent = render(result);
  } catch (err) {
    output.classList.add("error");
    output.textContent = String(err.message ?? err);
  }
}

function table(answers) {
  const vars = answers.variables;
  const lines = [vars.map((v) => "?" + v).join("\t")];
  for (const row of answers.rows) lines.push(vars.map((v) => row[v] ?? "").join("\t"));
  return lines.join("\n");
}

function render(r) {
  if ("count" in r) return `${r.count} answers\n\n${table(r)}`;
  if ("lossless" in r) {
    const sim = r.similarity.map(([a, m, s]) => `${a}  ~  ${m}  ${s.toFixed(3)}`).join("\n");
    return [
      `${r.original_triples} triples -> ${r.summary_triples} (SR ${r.sr_percent?.toFixed(2)}%, ${r.new_triples} added)`,
      `lossless: ${r.lossless} (${r.original_answers} vs ${r.summary_answers} distinct answers)`,
      "", "similarity:", sim || "(none)",
      "", "rewritten query:", r.rewritten,
      "", table(r.answers),
      "", "summary:", r.summary,
    ].join("\n");
  }
  const members = Object.entries(r.membership).map(([id, m]) => `${id}\n    ${m.join("\n    ")}`).join("\n");
  return [
    `${r.original_triples} triples -> ${r.summary_triples} (SR ${r.sr_percent?.toFixed(2)}%)`,
    `${r.inferred_triples} triples after inference, ${r.dropped_singletons} singleton groups dropped`,
    "", r.summary, "membership:", members,
  ].join("\n");
}

await init();
const ex = JSON.parse(example());
$("graph").value = ex.graph;
$("query").value = ex.query;
$("vectors").value = ex.vectors;
output.textContent = "Ready.";

$("run-query").onclick = () => show(() => runQuery($("graph").value, $("query").value));
$("run-qbs").onclick = () =>
  show(() => summarizeQbs($("graph").value, $("query").value, $("vectors").value,
    Number($("threshold").value), Number($("seed").value) >>> 0));
$("run-gbs").onclick = () => show(() => summarizeGbs($("graph").value, $("keep").checked));
