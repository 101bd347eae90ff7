// DOM construction helpers and the individual cards of the console.
// Pure view code: every number shown is a value the service sent.

import { markInputName, voteInputName } from "./schema";
import type {
  BallotLocation,
  ContestSchema,
  Evaluation,
  SessionState,
  TrajectoryPoint,
} from "./types";

type Attrs = Record<string, string | boolean | null | undefined>;

export function h(tag: string, attrs: Attrs = {}, ...children: (Node | string)[]): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (value === null || value === undefined || value === false) continue;
    if (value === true) {
      el.setAttribute(key, "");
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const child of children) {
    el.append(child);
  }
  return el;
}

// display rounding only; the raw service value rides along in data-p
export function formatP(p: number): string {
  if (p >= 0.001) return p.toFixed(4);
  return p.toExponential(3);
}

export function pValueBadge(p: number, alpha: number): HTMLElement {
  const el = h(
    "span",
    { id: "p-value", class: p <= alpha ? "p-val confirmed" : "p-val", "data-p": String(p) },
    formatP(p),
  );
  return el;
}

export function summaryCard(id: string, state: SessionState): HTMLElement {
  const warning = state.margin_warning;
  const rows: [string, string][] = [
    ["session", id],
    ["method", state.method],
    ["risk limit", String(state.alpha)],
    ["sampling bound", `1..${state.sampling_upper_bound}`],
    ["phantom ballots", String(state.phantom_ballots)],
    ["draws issued", String(state.draws_issued)],
    ["worst-cased draws", String(state.phantom_events)],
  ];
  const table = h("table", { class: "kv" });
  for (const [key, value] of rows) {
    table.append(h("tr", {}, h("th", {}, key), h("td", {}, value)));
  }
  const card = h("section", { id: "summary", class: "card" }, h("h2", {}, "Session"), table);
  if (warning.outcome_at_risk) {
    card.append(
      h(
        "p",
        { class: "margin-warning" },
        `Warning: ${warning.missing_ballots} unaccounted-for ballots meet or exceed ` +
          `the smallest margin (${warning.smallest_pairwise_margin_votes} votes). ` +
          "The audit proceeds at worst case, but investigate the accounting gap.",
      ),
    );
  }
  return card;
}

export function verdictBanner(state: SessionState, last: Evaluation | null): HTMLElement {
  if (state.status === "stopped_confirmed") {
    return h(
      "div",
      { id: "verdict-banner", class: "banner confirmed" },
      "Audit complete: reported outcomes confirmed at the risk limit.",
    );
  }
  if (state.status === "escalated_full_hand_count") {
    return h(
      "div",
      { id: "verdict-banner", class: "banner escalated" },
      "Escalated: proceed to a full hand count.",
    );
  }
  const note =
    last === null ? "Audit in progress." : "Audit in progress: keep sampling.";
  return h("div", { id: "verdict-banner", class: "banner active" }, note);
}

function locationText(loc: BallotLocation): string {
  if (loc.kind === "phantom") {
    return `Draw ${loc.draw_number} is beyond the manifest listing.`;
  }
  return `Group ${loc.group_ordinal} (${loc.group_id}), ballot ${loc.index_within_group}`;
}

export function instructionCard(state: SessionState, phantomNotice: string | null): HTMLElement {
  const card = h("section", { id: "instruction-card", class: "card" }, h("h2", {}, "Retrieval"));
  if (state.pending !== null) {
    const loc = state.pending.location;
    card.append(
      h("p", { class: "retrieval" }, locationText(loc)),
      h(
        "p",
        { class: "hint" },
        `Draw ${state.pending.draw_number} (#${state.pending.counter + 1} of the sequence). ` +
          "Retrieve the ballot and record what it shows, or report it unfindable.",
      ),
    );
    return card;
  }
  if (phantomNotice !== null) {
    card.append(h("p", { id: "phantom-notice", class: "phantom" }, phantomNotice));
  }
  if (state.status === "active") {
    card.append(h("p", { class: "hint" }, "No draw pending. Issue the next draw to continue."));
  } else {
    card.append(h("p", { class: "hint" }, "The session has ended; no further draws."));
  }
  return card;
}

export function interpretationForm(contests: ContestSchema[], enabled: boolean): HTMLElement {
  const fieldset = h("fieldset", { id: "interp-fields", disabled: !enabled });
  for (const contest of contests) {
    const block = h("div", { class: "contest-block" });
    block.append(
      h(
        "h3",
        {},
        `${contest.contest_id}` +
          (contest.k_seats > 1 ? ` (vote for up to ${contest.k_seats})` : ""),
      ),
    );
    for (const candidate of contest.candidates) {
      const name = voteInputName(contest.contest_id);
      block.append(
        h(
          "label",
          { class: "choice" },
          h("input", { type: "checkbox", name, value: candidate }),
          ` ${candidate}`,
        ),
      );
    }
    const markName = markInputName(contest.contest_id);
    const marks = h("div", { class: "marks" });
    for (const [value, label] of [
      ["votes", "selections above (none = undervote)"],
      ["overvote", "overvote"],
      ["invalid", "invalid"],
    ]) {
      marks.append(
        h(
          "label",
          { class: "choice" },
          h("input", {
            type: "radio",
            name: markName,
            value,
            checked: value === "votes",
          }),
          ` ${label}`,
        ),
      );
    }
    block.append(marks);
    fieldset.append(block);
  }
  fieldset.append(
    h("button", { id: "found-btn", type: "button", class: "primary" }, "Record ballot as read"),
    h("button", { id: "notfound-btn", type: "button", class: "danger" }, "Ballot cannot be found"),
  );
  return h("form", { id: "interp-form", class: "card" }, h("h2", {}, "Interpretation"), fieldset);
}

export function notFoundConfirm(): HTMLElement {
  return h(
    "div",
    { id: "notfound-confirm", class: "card confirm" },
    h(
      "p",
      {},
      "Reporting a listed ballot as unfindable is irreversible: the audit " +
        "charges it at worst case, as if it showed whatever most favors the " +
        "losers. Confirm only after the search is exhausted.",
    ),
    h("input", { id: "notfound-note", type: "text", placeholder: "note (optional)" }),
    h("button", { id: "notfound-confirm-btn", type: "button", class: "danger" }, "Apply worst case"),
    h("button", { id: "notfound-cancel-btn", type: "button" }, "Keep searching"),
  );
}

const KIND_LABEL: Record<TrajectoryPoint["kind"], string> = {
  human: "read",
  zombie_not_found: "not found: worst case",
  zombie_unlisted_phantom: "phantom: worst case",
};

export function trajectoryCard(points: TrajectoryPoint[]): HTMLElement {
  const card = h("section", { id: "trajectory", class: "card" }, h("h2", {}, "P-value trajectory"));
  if (points.length === 0) {
    card.append(h("p", { class: "hint" }, "No ballots examined yet."));
    return card;
  }
  card.append(sparkline(points));
  const table = h(
    "table",
    { class: "traj" },
    h(
      "tr",
      {},
      h("th", {}, "#"),
      h("th", {}, "draw"),
      h("th", {}, "resolution"),
      h("th", {}, "P"),
    ),
  );
  for (const pt of points) {
    table.append(
      h(
        "tr",
        { "data-kind": pt.kind },
        h("td", {}, String(pt.counter + 1)),
        h("td", {}, String(pt.draw_number)),
        h("td", {}, h("span", { class: `kind ${pt.kind}` }, KIND_LABEL[pt.kind])),
        h("td", { "data-p": String(pt.p_value) }, formatP(pt.p_value)),
      ),
    );
  }
  card.append(h("div", { class: "traj-scroll" }, table));
  return card;
}

// log-scale polyline of the P-value after each examined ballot
function sparkline(points: TrajectoryPoint[]): SVGElement {
  const width = 560;
  const height = 120;
  const pad = 6;
  const ps = points.map((pt) => Math.max(pt.p_value, 1e-12));
  const logs = ps.map((p) => Math.log10(p));
  const lo = Math.min(...logs, Math.log10(0.05));
  const hi = Math.max(...logs, 0);
  const span = hi - lo || 1;
  const x = (i: number) =>
    points.length === 1 ? width / 2 : pad + (i * (width - 2 * pad)) / (points.length - 1);
  const y = (v: number) => pad + ((hi - v) * (height - 2 * pad)) / span;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "spark");
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", logs.map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`).join(" "));
  line.setAttribute("fill", "none");
  line.setAttribute("class", "spark-line");
  svg.append(line);
  for (let i = 0; i < points.length; i++) {
    if (points[i].kind === "human") continue;
    const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    dot.setAttribute("cx", x(i).toFixed(1));
    dot.setAttribute("cy", y(logs[i]).toFixed(1));
    dot.setAttribute("r", "3.5");
    dot.setAttribute("class", "spark-zombie");
    svg.append(dot);
  }
  return svg;
}
