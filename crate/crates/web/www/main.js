import init, { presolve_mps, postsolve_solution, conflict_report } from "./pkg/presolve_web.js";

const $ = (id) => document.getElementById(id);
let record = null;

function show(id, reply) {
  const value = JSON.parse(reply);
  if (value.error) {
    $(id).textContent = "error: " + value.error;
    return null;
  }
  return value;
}

function runPresolve() {
  const options = {
    mode: $("mode").value,
    disabled: $("disabled").value.split(",").map((s) => s.trim()).filter(Boolean),
    apply_immediately: $("immediate").checked,
  };
  $("reduced").textContent = "";
  $("report").textContent = "";
  const result = show("summary", presolve_mps($("mps").value, JSON.stringify(options)));
  record = result ? result.record : null;
  $("postsolve").disabled = record === null;
  if (!result) return;
  const applied = Object.entries(result.applied).map(([p, n]) => `  ${p} ${n}`).join("\n");
  $("summary").textContent =
    `status ${result.status} (${result.mode})\n` +
    `rows ${result.before.rows} -> ${result.after.rows}, cols ${result.before.cols} -> ${result.after.cols}, ` +
    `nonzeros ${result.before.nnz} -> ${result.after.nnz}\n` +
    `rounds ${result.rounds}, discarded transactions ${result.discarded}\napplied:\n${applied}`;
  $("reduced").textContent = result.reduced_mps;
  const report = show("report", conflict_report(result.log.join("\n")));
  if (report) $("report").textContent = report.report;
}

function runPostsolve() {
  const result = show("original", postsolve_solution(record, $("solution").value));
  if (result) $("original").textContent = result.solution;
}

await init();
$("run").addEventListener("click", runPresolve);
$("postsolve").addEventListener("click", runPostsolve);
$("run").disabled = false;
