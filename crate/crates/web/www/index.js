import init, { Demo, className } from "./pkg/hoiseg_web.js";

const PALETTE = [
  "#e6194b", "#f58230", "#ffe119", "#d2f53c", "#3cb44b", "#46f0f0",
  "#0082c8", "#911eb4", "#f032e6", "#aa6e28", "#141414",
];

const $ = (id) => document.getElementById(id);

function draw(id, demo, rgba) {
  const canvas = $(id);
  canvas.width = demo.width();
  canvas.height = demo.height();
  const image = new ImageData(new Uint8ClampedArray(rgba), canvas.width, canvas.height);
  canvas.getContext("2d").putImageData(image, 0, 0);
}

function bindOutput(input, output, digits) {
  const show = () => { $(output).value = Number($(input).value).toFixed(digits); };
  $(input).addEventListener("input", show);
  show();
}

async function main() {
  await init();
  const demo = new Demo();
  let trained = false;

  $("legend").innerHTML = PALETTE.map((c, i) => `<span><i style="background:${c}"></i>${className(i)}</span>`).join("");
  $("feature").max = demo.featureCount() - 1;
  bindOutput("theta", "theta-out", 2);
  bindOutput("sigma", "sigma-out", 2);
  bindOutput("feature", "feature-out", 0);
  bindOutput("lambda", "lambda-out", 1);

  const status = (text) => { $("status").textContent = text; };

  const showFeature = () => draw("response", demo, demo.featureResponse(Number($("feature").value)));

  const showSegmentation = () => {
    if (!trained) return;
    draw("forest", demo, demo.segment(0));
    $("forest-cap").textContent = `forest, ${(100 * demo.accuracy()).toFixed(1)}% correct`;
    const lambda = Number($("lambda").value);
    const t = performance.now();
    draw("crf", demo, demo.segment(lambda));
    const ms = performance.now() - t;
    $("crf-cap").textContent = `forest + CRF, ${(100 * demo.accuracy()).toFixed(1)}% correct, ${ms.toFixed(0)} ms`;
  };

  const render = () => {
    try {
      const rgba = demo.render(Number($("seed").value), Number($("theta").value), Number($("sigma").value));
      draw("depth", demo, rgba);
      draw("truth", demo, demo.truth());
      showFeature();
      showSegmentation();
      status("");
    } catch (e) {
      status(e.message);
    }
  };

  $("render").addEventListener("click", render);
  $("feature").addEventListener("input", showFeature);
  $("lambda").addEventListener("change", showSegmentation);
  $("train").addEventListener("click", () => {
    status("training...");
    setTimeout(() => {
      const t = performance.now();
      try {
        demo.train(Number($("frames").value));
        trained = true;
        $("lambda").disabled = false;
        status(`trained in ${((performance.now() - t) / 1000).toFixed(1)} s`);
        showSegmentation();
      } catch (e) {
        status(e.message);
      }
    }, 0);
  });

  render();
}

main();
