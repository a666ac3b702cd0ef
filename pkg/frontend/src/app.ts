import { ApiClient, ServiceError } from "./api.js";
import { buildGraphView, renderGraphSvg } from "./graph.js";
import { ProfileDraft, SLIDER_MAX } from "./profile.js";
import type { Catalog, Recommendation, RunHandle, SimMetrics } from "./types.js";

const RECOMMEND_DEBOUNCE_MS = 300;
const POLL_INTERVAL_MS = 500;

// default parameter block used when a pattern is toggled on in a what-if run
export const TOGGLE_PRESETS: Record<string, Record<string, unknown>> = {
  message_compressor: { bits: 4 },
  client_selector: { top_k: 4 },
  client_cluster: { n_groups: 2 },
  client_registry: {},
  model_co_versioning_registry: {},
  model_replacement_trigger: { window: 3, drop_threshold: 0.1 },
  deployment_selector: { capability_threshold: 0.5 },
  multi_task_model_trainer: { n_tasks: 2, shared_dims: 5 },
  heterogeneous_data_handler: { oversample_to_balance: true },
  incentive_registry: { reward_per_update: 5.0, p_base: 0.5, p_gain: 0.3 },
  asynchronous_aggregator: { alpha: 0.7, max_staleness: 50 },
  decentralised_aggregator: { topology: "ring" },
  hierarchical_aggregator: { n_edges: 2 },
  secure_aggregator: { masking: true, dp_sigma: 0.1 },
};

export const WHAT_IF_SCENARIO: Record<string, unknown> = {
  seed: 7,
  n_clients: 8,
  rounds: 12,
  label_skew_beta: 0.5,
  samples_per_client: { kind: "fixed", value: 50 },
};

export interface WhatIfOutcome {
  pattern: string;
  on: SimMetrics;
  off: SimMetrics;
  deltas: { final_accuracy: number; bytes_uplink: number; simulated_wall_time: number };
}

export class App {
  catalog!: Catalog;
  draft!: ProfileDraft;
  recommendation: Recommendation | null = null;
  lastError: ServiceError | Error | null = null;
  activeModel = "client_management";

  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight = 0;
  private requestCounter = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async start(): Promise<void> {
    const doc = this.root.ownerDocument;
    try {
      this.catalog = await this.api.getCatalog();
    } catch (err) {
      // no stale render: only the connection banner appears
      this.root.replaceChildren();
      const banner = doc.createElement("div");
      banner.id = "connection-banner";
      banner.className = "banner error";
      banner.textContent = "decision service unreachable — start `fedarch serve` and reload";
      this.root.appendChild(banner);
      this.lastError = err as Error;
      return;
    }
    this.draft = new ProfileDraft(this.catalog);
    this.renderShell();
    await this.refreshRecommendation();
  }

  /** Resolves once no recommend call is pending or in flight (test hook). */
  async whenIdle(): Promise<void> {
    for (;;) {
      if (this.debounceTimer === null && this.inflight === 0) return;
      await new Promise((resolve) => setTimeout(resolve, 15));
    }
  }

  // --- profile edits (all recommendation updates flow through here) ---

  onSliderInput(attributeId: string, position: number): void {
    this.draft.setSlider(attributeId, position);
    this.scheduleRecommend();
  }

  onFlagToggle(key: string, on: boolean): void {
    this.draft.toggleFlag(key, on);
    this.scheduleRecommend();
  }

  onForceChip(patternId: string, state: "in" | "out" | "clear"): void {
    if (state === "in") this.draft.forceIn(patternId);
    else if (state === "out") this.draft.forceOut(patternId);
    else this.draft.unforce(patternId);
    this.scheduleRecommend();
  }

  private scheduleRecommend(): void {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.refreshRecommendation();
    }, RECOMMEND_DEBOUNCE_MS);
  }

  private async refreshRecommendation(): Promise<void> {
    const requestId = ++this.requestCounter;
    this.inflight += 1;
    try {
      const rec = await this.api.recommend(this.draft.toProfile());
      if (requestId === this.requestCounter) {
        this.recommendation = rec;
        this.lastError = null;
        this.renderRecommendation();
      }
    } catch (err) {
      if (requestId === this.requestCounter) {
        this.lastError = err as Error;
        this.renderInlineError();
      }
    } finally {
      this.inflight -= 1;
    }
  }

  // --- what-if simulations ---

  async runWhatIf(patternId: string): Promise<WhatIfOutcome> {
    const params = TOGGLE_PRESETS[patternId] ?? {};
    const offCfg = { ...WHAT_IF_SCENARIO, pattern_toggles: {} };
    const onCfg = { ...WHAT_IF_SCENARIO, pattern_toggles: { [patternId]: params } };
    const [onHandle, offHandle] = await Promise.all([
      this.api.startSimulation(onCfg),
      this.api.startSimulation(offCfg),
    ]);
    const [on, off] = await Promise.all([
      this.api.pollRun(onHandle.run_id, POLL_INTERVAL_MS),
      this.api.pollRun(offHandle.run_id, POLL_INTERVAL_MS),
    ]);
    if (on.status !== "done" || off.status !== "done") {
      throw new Error(on.error || off.error || "what-if run failed");
    }
    const outcome = this.buildOutcome(patternId, on, off);
    this.renderWhatIf(outcome);
    return outcome;
  }

  private buildOutcome(pattern: string, on: RunHandle, off: RunHandle): WhatIfOutcome {
    const a = on.metrics!;
    const b = off.metrics!;
    return {
      pattern,
      on: a,
      off: b,
      deltas: {
        final_accuracy: a.final_accuracy - b.final_accuracy,
        bytes_uplink: a.bytes_uplink - b.bytes_uplink,
        simulated_wall_time: a.simulated_wall_time - b.simulated_wall_time,
      },
    };
  }

  // --- rendering ---

  private renderShell(): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    const tabs = doc.createElement("nav");
    tabs.id = "model-tabs";
    for (const model of this.catalog.decision_models) {
      const button = doc.createElement("button");
      button.className = "tab";
      button.dataset.model = model.id;
      button.textContent = model.id.replaceAll("_", " ");
      button.addEventListener("click", () => {
        this.activeModel = model.id;
        this.renderRecommendation();
      });
      tabs.appendChild(button);
    }
    this.root.appendChild(tabs);

    const main = doc.createElement("div");
    main.id = "layout";

    const controls = doc.createElement("aside");
    controls.id = "profile-panel";
    const sliderBox = doc.createElement("div");
    sliderBox.id = "sliders";
    for (const attr of this.catalog.attributes) {
      const row = doc.createElement("label");
      row.className = "slider-row";
      const name = doc.createElement("span");
      name.textContent = attr.name;
      const input = doc.createElement("input");
      input.type = "range";
      input.min = "0";
      input.max = String(SLIDER_MAX);
      input.value = "0";
      input.dataset.attribute = attr.id;
      input.addEventListener("input", () =>
        this.onSliderInput(attr.id, Number(input.value)));
      row.append(name, input);
      sliderBox.appendChild(row);
    }
    controls.appendChild(sliderBox);

    const flagBox = doc.createElement("div");
    flagBox.id = "context-flags";
    for (const key of this.catalog.constraint_keys) {
      const row = doc.createElement("label");
      row.className = "flag-row";
      const input = doc.createElement("input");
      input.type = "checkbox";
      input.dataset.flag = key;
      input.addEventListener("change", () => this.onFlagToggle(key, input.checked));
      const name = doc.createElement("span");
      name.textContent = key;
      row.append(input, name);
      flagBox.appendChild(row);
    }
    controls.appendChild(flagBox);

    const errorBox = doc.createElement("div");
    errorBox.id = "inline-error";
    errorBox.className = "banner hidden";
    controls.appendChild(errorBox);
    main.appendChild(controls);

    const content = doc.createElement("section");
    content.id = "content";
    const graphBox = doc.createElement("div");
    graphBox.id = "graph";
    const rationale = doc.createElement("div");
    rationale.id = "rationale";
    const whatIfBox = doc.createElement("div");
    whatIfBox.id = "whatif";
    content.append(graphBox, rationale, whatIfBox);
    main.appendChild(content);
    this.root.appendChild(main);
  }

  chosenFor(modelId: string): string[] {
    if (!this.recommendation) return [];
    const model = this.recommendation.models[modelId];
    return model ? model.best.chosen : [];
  }

  private renderRecommendation(): void {
    const doc = this.root.ownerDocument;
    const graphBox = doc.getElementById("graph");
    const rationale = doc.getElementById("rationale");
    if (!graphBox || !rationale) return;

    for (const tab of this.root.querySelectorAll(".tab")) {
      tab.classList.toggle("active",
        (tab as HTMLElement).dataset.model === this.activeModel);
    }

    const highlighted = new Set(this.chosenFor(this.activeModel));
    const view = buildGraphView(this.catalog, this.activeModel);
    graphBox.replaceChildren(renderGraphSvg(doc, view, highlighted));

    rationale.replaceChildren();
    const heading = doc.createElement("h3");
    heading.textContent = highlighted.size
      ? `selected: ${[...highlighted].sort().join(", ")}`
      : "no pattern selected for this decision";
    rationale.appendChild(heading);

    if (this.recommendation) {
      const best = this.recommendation.models[this.activeModel]?.best;
      if (best) {
        const list = doc.createElement("ul");
        list.id = "tradeoffs";
        for (const eff of best.combined_effects) {
          if (eff.direction !== "tradeoff") continue;
          const item = doc.createElement("li");
          item.className = "tradeoff";
          item.dataset.attribute = eff.attribute_id;
          item.textContent =
            `${eff.pattern_id} accepts lower ${eff.attribute_id}: ${eff.note} ` +
            `[${eff.source_anchor}]`;
          list.appendChild(item);
        }
        rationale.appendChild(list);
      }
    }
    const errorBox = doc.getElementById("inline-error");
    if (errorBox && !this.lastError) {
      errorBox.classList.add("hidden");
      errorBox.textContent = "";
    }
  }

  private renderInlineError(): void {
    const errorBox = this.root.ownerDocument.getElementById("inline-error");
    if (!errorBox) return;
    const err = this.lastError;
    errorBox.textContent = err instanceof ServiceError
      ? `${err.payload.code}: ${err.payload.message}`
      : String(err);
    errorBox.classList.remove("hidden");
  }

  private renderWhatIf(outcome: WhatIfOutcome): void {
    const doc = this.root.ownerDocument;
    const box = doc.getElementById("whatif");
    if (!box) return;
    box.replaceChildren();
    const heading = doc.createElement("h3");
    heading.textContent = `what-if: ${outcome.pattern} on vs off`;
    box.appendChild(heading);
    const table = doc.createElement("table");
    table.id = "whatif-deltas";
    for (const [metric, delta] of Object.entries(outcome.deltas)) {
      const row = doc.createElement("tr");
      row.dataset.metric = metric;
      row.dataset.delta = String(delta);
      const name = doc.createElement("td");
      name.textContent = metric;
      const value = doc.createElement("td");
      value.className = delta < 0 ? "delta negative" : "delta";
      value.textContent = (delta >= 0 ? "+" : "") + delta.toPrecision(4);
      row.append(name, value);
      table.appendChild(row);
    }
    box.appendChild(table);
  }
}

export async function mount(root: HTMLElement, api: ApiClient): Promise<App> {
  const app = new App(root, api);
  await app.start();
  return app;
}
