// DOM wiring for the explorer page. All numbers shown come straight from the
// service; this file only renders and forwards slider moves.

import { ApiClient } from "./api.js";
import {
  RequestSequencer,
  SLIDER_STEPS,
  ViewModel,
  clampToRange,
  conditionalDisplay,
  formatInterval,
  formatValue,
  fromModelResponse,
  rowViews,
  sliderRange,
  stepForValue,
  valueAtStep,
  withPin,
  withoutPin,
} from "./model.js";

const DEBOUNCE_MS = 120;

const api = new ApiClient();
const sequencer = new RequestSequencer();
let view: ViewModel | null = null;
let pinSetting: string | null = null;
let debounceTimer: number | undefined;

const app = document.getElementById("app") as HTMLElement;

function chartBounds(v: ViewModel): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of rowViews(v)) {
    lo = Math.min(lo, row.original[0]);
    hi = Math.max(hi, row.original[1]);
  }
  const pad = 0.05 * (hi - lo || 1);
  return [lo - pad, hi + pad];
}

function barStyle(pair: [number, number], bounds: [number, number]): string {
  const span = bounds[1] - bounds[0];
  const left = ((pair[0] - bounds[0]) / span) * 100;
  const width = Math.max(((pair[1] - pair[0]) / span) * 100, 0.4);
  return `left:${left.toFixed(2)}%;width:${width.toFixed(2)}%`;
}

function render(): void {
  if (!view) return;
  const bounds = chartBounds(view);
  const pin = view.activePin;
  const parts: string[] = [];

  if (!view.feasible) {
    parts.push(
      `<div class="banner error">Infeasible: the bounds imposed on the settings are` +
        ` inconsistent with the data and must be relaxed.</div>`,
    );
  } else if (pin && !pin.feasible) {
    parts.push(
      `<div class="banner warn">Pin at ${formatValue(pin.value)} lies outside the joint` +
        ` polytope; no conditional intervals.</div>`,
    );
  }
  if (view.violations > 0) {
    parts.push(
      `<div class="badge">transitivity violations: ${view.violations}</div>`,
    );
  }

  parts.push(`<div class="chart">`);
  for (const row of rowViews(view)) {
    const cond = conditionalDisplay(view, row.setting);
    parts.push(`<div class="row" data-setting="${row.setting}">`);
    parts.push(`<div class="label">${row.setting}</div>`);
    parts.push(`<div class="track">`);
    parts.push(`<div class="bar original" style="${barStyle(row.original, bounds)}"></div>`);
    if (row.projected) {
      parts.push(`<div class="bar projected" style="${barStyle(row.projected, bounds)}"></div>`);
    }
    if (row.conditional) {
      parts.push(
        `<div class="bar conditional" style="${barStyle(row.conditional, bounds)}"></div>`,
      );
    }
    parts.push(`</div>`);
    const text = cond ?? (row.projected ? formatInterval(row.projected) : "-");
    parts.push(`<div class="value">${text}</div>`);
    parts.push(`</div>`);
  }
  parts.push(`</div>`);

  if (view.feasible) {
    const options = view.settings
      .map((s) => `<option value="${s}"${s === pinSetting ? " selected" : ""}>${s}</option>`)
      .join("");
    parts.push(`<div class="controls">`);
    parts.push(`<label>Pin setting <select id="pin-setting">${options}</select></label>`);
    if (pinSetting) {
      const range = sliderRange(view, pinSetting);
      const current = pin && pin.setting === pinSetting ? pin.value : range[0];
      const step = stepForValue(range, current);
      const frac = SLIDER_STEPS > 0 ? step / SLIDER_STEPS : 0;
      parts.push(
        `<input id="pin-slider" type="range" min="0" max="${SLIDER_STEPS}" value="${step}">`,
      );
      parts.push(
        `<input id="pin-value" type="number" step="any" value="${current}">` +
          `<span class="fraction">fraction ${frac.toFixed(3)}</span>`,
      );
      parts.push(`<button id="pin-clear">Unpin</button>`);
    }
    parts.push(`</div>`);
  }

  app.innerHTML = parts.join("");
  wireControls();
}

function wireControls(): void {
  const select = document.getElementById("pin-setting") as HTMLSelectElement | null;
  select?.addEventListener("change", () => {
    pinSetting = select.value;
    if (view) view = withoutPin(view);
    render();
  });
  const slider = document.getElementById("pin-slider") as HTMLInputElement | null;
  slider?.addEventListener("input", () => {
    if (!view || !pinSetting) return;
    const range = sliderRange(view, pinSetting);
    schedulePin(valueAtStep(range, Number(slider.value)));
  });
  const input = document.getElementById("pin-value") as HTMLInputElement | null;
  input?.addEventListener("change", () => {
    if (!view || !pinSetting) return;
    const range = sliderRange(view, pinSetting);
    const value = clampToRange(range, Number(input.value));
    schedulePin(value);
  });
  const clear = document.getElementById("pin-clear") as HTMLButtonElement | null;
  clear?.addEventListener("click", () => {
    if (view) view = withoutPin(view);
    render();
  });
}

function schedulePin(value: number): void {
  window.clearTimeout(debounceTimer);
  debounceTimer = window.setTimeout(() => void sendPin(value), DEBOUNCE_MS);
}

async function sendPin(value: number): Promise<void> {
  if (!view || !pinSetting) return;
  const token = sequencer.issue();
  try {
    const resp = await api.pin(pinSetting, value, view.snapshot);
    if (!sequencer.isCurrent(token) || !view) return;
    view = withPin(view, resp);
    render();
  } catch (err) {
    if (!sequencer.isCurrent(token)) return;
    app.insertAdjacentHTML(
      "afterbegin",
      `<div class="banner error">service error: ${String(err)} <button onclick="location.reload()">retry</button></div>`,
    );
  }
}

async function boot(): Promise<void> {
  try {
    const doc = await api.getModel();
    view = fromModelResponse(doc);
    pinSetting = view.settings[0] ?? null;
    render();
  } catch (err) {
    app.innerHTML = `<div class="banner error">could not reach the bounds service: ${String(err)}` +
      ` <button onclick="location.reload()">retry</button></div>`;
  }
}

void boot();
