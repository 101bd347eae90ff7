// Console state machine. One mutating service call per operator action;
// all state shown comes back from the service (the console never
// computes audit math). Refresh is poll-based: a sequential
// single-operator audit does not need push latency.

import { ApiClient, ApiError } from "./api";
import { readInterpretation } from "./schema";
import {
  h,
  instructionCard,
  interpretationForm,
  notFoundConfirm,
  pValueBadge,
  summaryCard,
  trajectoryCard,
  verdictBanner,
} from "./view";
import type {
  ContestSchema,
  Evaluation,
  SessionState,
  TrajectoryPoint,
} from "./types";

export interface AppOptions {
  // 0 disables the timer (tests drive refresh() directly)
  pollMs?: number;
}

export class App {
  private sessionIdValue: string | null = null;
  private state: SessionState | null = null;
  private contests: ContestSchema[] = [];
  private points: TrajectoryPoint[] = [];
  private lastEvaluation: Evaluation | null = null;
  private notFoundArmed = false;
  private phantomNotice: string | null = null;
  private message = "";
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly pollMs: number;
  private busy: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    options: AppOptions = {},
  ) {
    this.pollMs = options.pollMs ?? 3000;
    this.renderCreate();
  }

  get sessionId(): string | null {
    return this.sessionIdValue;
  }

  destroy(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  // resolves once every queued action has settled; errors are shown in
  // the message line, not thrown at callers
  whenIdle(): Promise<void> {
    return this.busy;
  }

  private enqueue(action: () => Promise<void>): void {
    this.busy = this.busy.then(() =>
      action().catch((err) => {
        this.showError(err);
      }),
    );
  }

  private showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.message = `${err.code}: ${err.message}`;
      if (err.isConflict) {
        // the server-side session moved on (stale tab); re-sync
        this.message += " (view refreshed)";
        this.enqueue(() => this.refreshNow());
      }
    } else {
      this.message = String(err);
    }
    this.render();
  }

  // -- session lifecycle ------------------------------------------------

  createFromForm(form: HTMLElement): void {
    const text = (name: string): string =>
      form.querySelector<HTMLTextAreaElement | HTMLInputElement>(`[name="${name}"]`)?.value ?? "";
    const num = (name: string): number | null => {
      const raw = text(name).trim();
      return raw === "" ? null : Number(raw);
    };
    const method = text("method") as "comparison" | "polling";
    const manifestCsv = text("manifest");
    const cvrText = text("cvr").trim();
    let contests: unknown;
    try {
      contests = JSON.parse(text("contests"));
    } catch (err) {
      this.message = `contests JSON does not parse: ${err}`;
      this.render();
      return;
    }
    const manifestTotal = manifestCsv
      .split("\n")
      .slice(1)
      .filter((line) => line.trim() !== "")
      .reduce((sum, line) => sum + Number(line.split(",")[1] ?? 0), 0);
    const payload = {
      method,
      alpha: num("alpha") ?? 0.1,
      gamma: method === "comparison" ? num("gamma") : null,
      seed_hex: text("seed").trim(),
      seed_origin: text("seed_origin").trim(),
      escalation_cap: num("cap"),
      acknowledge_margin_risk:
        form.querySelector<HTMLInputElement>('[name="acknowledge"]')?.checked ?? false,
      counts: {
        n_manifest: manifestTotal,
        n_upper: num("n_upper"),
        n_oracle: num("n_oracle"),
      },
      contests,
      manifest_csv: manifestCsv,
      cvr_lines:
        method === "comparison" && cvrText !== "" ? cvrText.split("\n").filter((l) => l.trim()) : null,
      cvr_strict: false,
    };
    this.enqueue(async () => {
      const created = await this.api.createSession(payload);
      this.adopt(created.session_id, created.state, created.contests, []);
    });
  }

  attach(id: string): void {
    this.enqueue(async () => {
      const view = await this.api.getSession(id);
      const traj = await this.api.trajectory(id);
      this.adopt(id, view.state, view.contests, traj.points);
    });
  }

  private adopt(
    id: string,
    state: SessionState,
    contests: ContestSchema[],
    points: TrajectoryPoint[],
  ): void {
    this.sessionIdValue = id;
    this.state = state;
    this.contests = contests;
    this.points = points;
    this.message = "";
    this.phantomNotice = null;
    this.render();
    if (this.pollMs > 0 && this.timer === null) {
      this.timer = setInterval(() => {
        this.enqueue(() => this.refreshNow());
      }, this.pollMs);
    }
  }

  refresh(): void {
    this.enqueue(() => this.refreshNow());
  }

  private async refreshNow(): Promise<void> {
    if (this.sessionIdValue === null) return;
    const view = await this.api.getSession(this.sessionIdValue);
    const traj = await this.api.trajectory(this.sessionIdValue);
    this.state = view.state;
    this.contests = view.contests;
    this.points = traj.points;
    this.render();
  }

  // -- operator actions -------------------------------------------------

  draw(): void {
    this.enqueue(async () => {
      if (this.sessionIdValue === null) return;
      const result = await this.api.nextDraw(this.sessionIdValue);
      this.state = result.state;
      this.lastEvaluation = result.evaluation;
      this.message = "";
      this.phantomNotice = result.auto_resolved
        ? `Draw ${result.draw_number} hit a phantom ballot (beyond the listing); ` +
          "auto-resolved as worst case."
        : null;
      await this.pullTrajectory();
      this.render();
    });
  }

  submitFound(): void {
    this.enqueue(async () => {
      if (this.sessionIdValue === null || this.state === null) return;
      const form = this.root.querySelector<HTMLElement>("#interp-form");
      if (form === null) return;
      const interpretation = readInterpretation(form, this.contests);
      const resp = await this.api.submitInterpretation(this.sessionIdValue, {
        outcome: "found",
        interpretation,
      });
      this.state = resp.state;
      this.lastEvaluation = resp.evaluation;
      this.message = "";
      this.phantomNotice = null;
      await this.pullTrajectory();
      this.render();
    });
  }

  armNotFound(): void {
    this.notFoundArmed = true;
    this.render();
  }

  cancelNotFound(): void {
    this.notFoundArmed = false;
    this.render();
  }

  confirmNotFound(): void {
    this.enqueue(async () => {
      if (this.sessionIdValue === null) return;
      const note =
        this.root.querySelector<HTMLInputElement>("#notfound-note")?.value.trim() || undefined;
      const resp = await this.api.submitInterpretation(this.sessionIdValue, {
        outcome: "not_found",
        note,
      });
      this.notFoundArmed = false;
      this.state = resp.state;
      this.lastEvaluation = resp.evaluation;
      this.message = "";
      this.phantomNotice = null;
      await this.pullTrajectory();
      this.render();
    });
  }

  private async pullTrajectory(): Promise<void> {
    if (this.sessionIdValue === null) return;
    const traj = await this.api.trajectory(this.sessionIdValue);
    this.points = traj.points;
  }

  // -- rendering --------------------------------------------------------

  private renderCreate(): void {
    this.root.replaceChildren();
    const form = h(
      "form",
      { id: "create-form", class: "card" },
      h("h2", {}, "Start a session"),
      h(
        "label",
        {},
        "method ",
        h(
          "select",
          { name: "method" },
          h("option", { value: "comparison", selected: true }, "comparison"),
          h("option", { value: "polling" }, "polling"),
        ),
      ),
      h("label", {}, "risk limit ", h("input", { name: "alpha", value: "0.1", size: "6" })),
      h("label", {}, "gamma (comparison, blank = default) ", h("input", { name: "gamma", size: "8" })),
      h("label", {}, "seed (hex) ", h("input", { name: "seed", size: "24" })),
      h("label", {}, "seed origin ", h("input", { name: "seed_origin", size: "24" })),
      h("label", {}, "sampling upper bound ", h("input", { name: "n_upper", size: "8" })),
      h("label", {}, "known true count (blank if unknown) ", h("input", { name: "n_oracle", size: "8" })),
      h("label", {}, "escalation cap (draws) ", h("input", { name: "cap", size: "8" })),
      h(
        "label",
        {},
        h("input", { type: "checkbox", name: "acknowledge" }),
        " acknowledge margin risk warning",
      ),
      h("label", {}, "manifest CSV", h("textarea", { name: "manifest", rows: "6" })),
      h("label", {}, "contests JSON", h("textarea", { name: "contests", rows: "6" })),
      h("label", {}, "machine records JSONL (comparison)", h("textarea", { name: "cvr", rows: "6" })),
      h("button", { id: "create-btn", type: "button", class: "primary" }, "Create session"),
      h("hr", {}),
      h("label", {}, "or attach to session id ", h("input", { name: "attach_id", size: "20" })),
      h("button", { id: "attach-btn", type: "button" }, "Attach"),
    );
    form.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.id === "create-btn") this.createFromForm(form);
      if (target.id === "attach-btn") {
        const id = form.querySelector<HTMLInputElement>('[name="attach_id"]')?.value.trim();
        if (id) this.attach(id);
      }
    });
    this.root.append(
      h("h1", {}, "Audit console"),
      form,
      h("p", { id: "message", class: "message" }, this.message),
    );
  }

  render(): void {
    if (this.state === null || this.sessionIdValue === null) {
      this.renderCreate();
      return;
    }
    const state = this.state;
    const active = state.status === "active";
    const formEnabled = active && state.pending !== null;

    this.root.replaceChildren(
      h("h1", {}, "Audit console"),
      verdictBanner(state, this.lastEvaluation),
      h(
        "div",
        { class: "statusline" },
        "current P-value: ",
        pValueBadge(state.p_value, state.alpha),
        h(
          "a",
          { id: "log-link", href: this.api.logUrl(this.sessionIdValue), download: "session.log" },
          "download log",
        ),
      ),
      summaryCard(this.sessionIdValue, state),
      instructionCard(state, this.phantomNotice),
    );

    const drawBtn = h(
      "button",
      {
        id: "draw-btn",
        type: "button",
        class: "primary",
        disabled: !active || state.pending !== null,
      },
      "Issue next draw",
    );
    drawBtn.addEventListener("click", () => this.draw());
    this.root.append(h("div", { class: "actions" }, drawBtn));

    const form = interpretationForm(this.contests, formEnabled);
    form.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.id === "found-btn") this.submitFound();
      if (target.id === "notfound-btn") this.armNotFound();
    });
    this.root.append(form);

    if (this.notFoundArmed && formEnabled) {
      const confirm = notFoundConfirm();
      confirm.addEventListener("click", (ev) => {
        const target = ev.target as HTMLElement;
        if (target.id === "notfound-confirm-btn") this.confirmNotFound();
        if (target.id === "notfound-cancel-btn") this.cancelNotFound();
      });
      this.root.append(confirm);
    }

    this.root.append(
      trajectoryCard(this.points),
      h("p", { id: "message", class: "message" }, this.message),
    );
  }
}
