// View model for the explorer. Holds service responses verbatim; the only
// client-side computation is display formatting and slider geometry. No
// interval arithmetic happens here.

import type { IntervalPair, ModelResponse, PinResponse, UnivariateRow } from "./api.js";

export const SLIDER_STEPS = 200;
export const DISPLAY_DECIMALS = 3;

export interface ActivePin {
  setting: string;
  value: number;
  feasible: boolean;
  conditional: Record<string, IntervalPair> | null;
}

export interface RowView {
  setting: string;
  estimate: number;
  original: IntervalPair;
  projected: IntervalPair | null;
  conditional: IntervalPair | null;
}

export interface ViewModel {
  snapshot: string;
  feasible: boolean;
  settings: string[];
  rows: Map<string, UnivariateRow>;
  activePin: ActivePin | null;
  violations: number;
}

export function fromModelResponse(doc: ModelResponse): ViewModel {
  const rows = new Map<string, UnivariateRow>();
  for (const row of doc.univariate_table) rows.set(row.setting, row);
  return {
    snapshot: doc.snapshot,
    feasible: doc.feasible,
    settings: doc.settings,
    rows,
    activePin: null,
    violations: doc.audits.transitivity_violations.length,
  };
}

export function withPin(view: ViewModel, resp: PinResponse): ViewModel {
  return {
    ...view,
    activePin: {
      setting: resp.setting,
      value: resp.pinned_value,
      feasible: resp.feasible,
      conditional: resp.conditional,
    },
  };
}

export function withoutPin(view: ViewModel): ViewModel {
  return { ...view, activePin: null };
}

export function rowViews(view: ViewModel): RowView[] {
  return view.settings.map((setting) => {
    const row = view.rows.get(setting);
    if (!row) throw new Error(`no table row for setting ${setting}`);
    const pin = view.activePin;
    const conditional =
      pin && pin.feasible && pin.conditional ? (pin.conditional[setting] ?? null) : null;
    return {
      setting,
      estimate: row.estimate,
      original: [row.original_lower, row.original_upper],
      projected:
        row.new_lower !== null && row.new_upper !== null ? [row.new_lower, row.new_upper] : null,
      conditional,
    };
  });
}

export function formatValue(x: number): string {
  return x.toFixed(DISPLAY_DECIMALS);
}

export function formatInterval(pair: IntervalPair): string {
  return `[${formatValue(pair[0])}, ${formatValue(pair[1])}]`;
}

/** Displayed conditional interval string for a setting, or null when unpinned
 * or infeasible. Values come from the service response untouched. */
export function conditionalDisplay(view: ViewModel, setting: string): string | null {
  const pin = view.activePin;
  if (!pin || !pin.feasible || !pin.conditional) return null;
  const pair = pin.conditional[setting];
  return pair ? formatInterval(pair) : null;
}

/** Marginal interval that bounds the pin slider for a setting. */
export function sliderRange(view: ViewModel, setting: string): IntervalPair {
  const row = view.rows.get(setting);
  if (!row || row.new_lower === null || row.new_upper === null) {
    throw new Error(`setting ${setting} has no projected interval to pin within`);
  }
  return [row.new_lower, row.new_upper];
}

/** Map a slider step (0..SLIDER_STEPS) to a value in the marginal. */
export function valueAtStep(range: IntervalPair, step: number): number {
  const frac = Math.min(Math.max(step / SLIDER_STEPS, 0), 1);
  return range[0] + frac * (range[1] - range[0]);
}

/** Clamp a free-typed value into the marginal before sending it. */
export function clampToRange(range: IntervalPair, value: number): number {
  return Math.min(Math.max(value, range[0]), range[1]);
}

/** Nearest slider step for a value, for syncing the slider to the input. */
export function stepForValue(range: IntervalPair, value: number): number {
  const width = range[1] - range[0];
  if (width <= 0) return 0;
  const frac = (clampToRange(range, value) - range[0]) / width;
  return Math.round(frac * SLIDER_STEPS);
}

/** Latest-wins guard for in-flight pin requests: a response is applied only
 * when its token is still the newest one issued. */
export class RequestSequencer {
  private latest = 0;

  issue(): number {
    return ++this.latest;
  }

  isCurrent(token: number): boolean {
    return token === this.latest;
  }
}
