import init, {
  scheduleSvg, heteroWrapSvg, twoSpeedSvg, fixtureTaskset, fixturePlatform,
} from "../pkg/hetsched_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(prefix, f, summarize) {
  try {
    const v = JSON.parse(f());
    $(prefix + "-svg").innerHTML = v.svg;
    $(prefix + "-summary").textContent = summarize(v);
    $(prefix + "-summary").className = "out";
  } catch (e) {
    $(prefix + "-svg").innerHTML = "";
    $(prefix + "-summary").textContent = String(e);
    $(prefix + "-summary").className = "out err";
  }
}

function runSchedule() {
  show("schedule", () => {
    const ts = fixtureTaskset($("ts-kind").value, num("ts-index"));
    const pf = fixturePlatform(num("pf-big"), num("pf-little"));
    return scheduleSvg(ts, pf, $("alg").value, num("grid"));
  }, (v) => {
    const rel = v.nodvfs_energy_mj ? ` (${(v.energy_mj / v.nodvfs_energy_mj).toFixed(4)} of no-DVFS)` : "";
    return `${v.algorithm}: ${v.energy_mj.toFixed(2)} mJ${rel}, ` +
      `${v.misses} misses, ${v.violations} violations, ` +
      `${v.preemptions} preemptions, ${v.inter_migrations} inter-type migrations`;
  });
}

function runWrap() {
  show("wrap", () => heteroWrapSvg($("shares").value, num("wrap-big"), num("wrap-little")),
    (v) => `both types, full: [${v.im_a}]  both types, partial: [${v.im_b}]  ` +
      `big only: [${v.cp_1}]  LITTLE only: [${v.cp_2}]`);
}

function runSpeed() {
  $("demand-value").textContent = $("demand").value;
  show("speed", () => twoSpeedSvg(num("core"), num("demand")),
    (v) => `${v.low_speed} for ${(100 * v.lambda).toFixed(1)}% then ${v.high_speed}, ` +
      `average ${v.average_power_mw.toFixed(2)} mW`);
}

$("ts-kind").addEventListener("change", () => {
  $("ts-index").max = $("ts-kind").value === "implicit" ? 15 : 9;
});

await init();
$("run-schedule").addEventListener("click", runSchedule);
$("run-wrap").addEventListener("click", runWrap);
$("demand").addEventListener("input", runSpeed);
$("core").addEventListener("change", runSpeed);
runSpeed();
runWrap();
