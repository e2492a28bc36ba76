import init, { Acquisition, scheduleBudgets } from "./pkg/pdac_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let acquisition = null;

function draw(canvas, rgba, size) {
  canvas.width = size;
  canvas.height = size;
  const image = new ImageData(new Uint8ClampedArray(rgba), size, size);
  canvas.getContext("2d").putImageData(image, 0, 0);
}

function status(text) {
  $("status").textContent = text;
}

function refreshBudgets() {
  if (!acquisition) return;
  const m0 = [...acquisition.mask].filter((c) => c === "1").length;
  try {
    const b = scheduleBudgets(acquisition.size, m0, num("iterations"), $("schedule").value);
    $("budgets").textContent = Array.from(b).join(", ");
  } catch (e) {
    $("budgets").textContent = e.message;
  }
}

function simulate() {
  try {
    acquisition?.free();
    acquisition = new Acquisition(
      num("size"), num("coils"), num("acceleration"), num("center"), num("sigma"), BigInt(num("seed")),
    );
  } catch (e) {
    acquisition = null;
    $("reconstruct").disabled = true;
    status(e.message);
    return;
  }
  draw($("truth"), acquisition.groundTruthRgba(), acquisition.size);
  $("masks").textContent = acquisition.mask;
  $("results").replaceChildren();
  $("reconstruct").disabled = false;
  refreshBudgets();
  status("acquisition ready");
}

function reconstruct() {
  const solver = $("solver").value;
  status(`running ${solver}...`);
  $("reconstruct").disabled = true;
  // let the status line paint before the solver blocks the thread
  setTimeout(() => {
    const start = performance.now();
    try {
      const r = acquisition.reconstruct(
        solver, $("schedule").value, $("predictor").value, num("iterations"), num("lambda"), num("inner"),
      );
      draw($("recon"), r.rgba(), acquisition.size);
      $("recon-caption").textContent = `${solver}, ${r.psnr.toFixed(2)} dB`;
      $("masks").textContent = acquisition.mask + "\n" + r.maskTrace();
      const row = document.createElement("tr");
      const trace = Array.from(r.psnrTrace()).map((v) => v.toFixed(1)).join(" ");
      for (const cell of [solver, r.psnr.toFixed(3), r.ssim.toFixed(4), r.nmse.toExponential(3), trace]) {
        const td = document.createElement("td");
        td.textContent = cell;
        row.appendChild(td);
      }
      $("results").appendChild(row);
      r.free();
      status(`${solver} finished in ${((performance.now() - start) / 1000).toFixed(1)} s`);
    } catch (e) {
      status(e.message);
    }
    $("reconstruct").disabled = false;
  }, 20);
}

await init();
$("simulate").addEventListener("click", simulate);
$("reconstruct").addEventListener("click", reconstruct);
$("schedule").addEventListener("change", refreshBudgets);
$("iterations").addEventListener("input", refreshBudgets);
simulate();
