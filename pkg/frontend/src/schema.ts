// Interpretation form driven by the contest schema the service returns,
// so a different election needs no console changes. Per contest the
// operator either ticks candidates (an empty selection is an undervote
// on that contest) or picks an explicit non-vote mark.

import type { ContestEntry, ContestSchema, InterpretationJson } from "./types";

export const MARKS = ["overvote", "invalid"] as const;

export function voteInputName(contestId: string): string {
  return `vote:${contestId}`;
}

export function markInputName(contestId: string): string {
  return `mark:${contestId}`;
}

// inside a quoted CSS attribute selector only backslash and the quote
// itself need escaping
function cssQuote(value: string): string {
  return value.replace(/\\/g, "\\\\").replace(/"/g, '\\"');
}

// Reads the checked inputs back out of a rendered interpretation form.
// The engine accepts {"votes": []} as an undervote, so the votes branch
// needs no special casing for an empty selection.
export function readInterpretation(
  form: HTMLElement,
  contests: ContestSchema[],
): InterpretationJson {
  const entries: Record<string, ContestEntry> = {};
  for (const contest of contests) {
    const cid = contest.contest_id;
    const markEl = form.querySelector<HTMLInputElement>(
      `input[name="${cssQuote(markInputName(cid))}"]:checked`,
    );
    const mark = markEl ? markEl.value : "votes";
    if (mark === "overvote" || mark === "invalid") {
      entries[cid] = mark;
      continue;
    }
    const votes: string[] = [];
    form
      .querySelectorAll<HTMLInputElement>(`input[name="${cssQuote(voteInputName(cid))}"]:checked`)
      .forEach((el) => votes.push(el.value));
    entries[cid] = { votes: votes.sort() };
  }
  return { contests: entries };
}
