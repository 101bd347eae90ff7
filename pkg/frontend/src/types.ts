// JSON shapes served by the engine's HTTP API (see docs/formats.md in
// the repository root). The console treats every number as opaque
// display data; nothing here is recomputed client-side.

export interface MarginWarning {
  missing_ballots: number;
  smallest_pairwise_margin_votes: number;
  outcome_at_risk: boolean;
}

export interface ListedLocation {
  kind: "listed";
  group_ordinal: number;
  index_within_group: number;
  group_id: string;
}

export interface PhantomLocation {
  kind: "phantom";
  draw_number: number;
}

export type BallotLocation = ListedLocation | PhantomLocation;

export interface PendingDraw {
  counter: number;
  draw_number: number;
  location: BallotLocation;
}

export type SessionStatus = "active" | "stopped_confirmed" | "escalated_full_hand_count";

export interface SessionState {
  method: "comparison" | "polling";
  status: SessionStatus;
  alpha: number;
  sampling_upper_bound: number;
  phantom_ballots: number;
  margin_warning: MarginWarning;
  draws_issued: number;
  pending: PendingDraw | null;
  p_value: number;
  phantom_events: number;
  cvr_misses: number;
  config_digest: string;
}

export interface ContestSchema {
  contest_id: string;
  candidates: string[];
  winners: string[];
  reported_tallies: Record<string, number>;
  k_seats: number;
}

export interface Evaluation {
  decision: "stop_confirmed" | "continue_sampling" | "recommend_full_hand_count";
  status: SessionStatus;
  p_value: number;
}

export type TrajectoryKind = "human" | "zombie_unlisted_phantom" | "zombie_not_found";

export interface TrajectoryPoint {
  counter: number;
  draw_number: number;
  kind: TrajectoryKind;
  n_sampled: number;
  p_value: number;
}

export interface CreateResponse {
  session_id: string;
  state: SessionState;
  contests: ContestSchema[];
}

export interface SessionView {
  state: SessionState;
  contests: ContestSchema[];
}

export interface DrawResponse {
  counter: number;
  draw_number: number;
  location: BallotLocation;
  auto_resolved: boolean;
  p_value: number;
  evaluation: Evaluation | null;
  state: SessionState;
}

export interface InterpretationResponse {
  p_value: number;
  evaluation: Evaluation | null;
  state: SessionState;
}

export interface TrajectoryResponse {
  points: TrajectoryPoint[];
  p_value: number;
  status: SessionStatus;
}

// one contest's entry inside a ballot interpretation
export type ContestEntry = { votes: string[] } | "undervote" | "overvote" | "invalid";

export interface InterpretationJson {
  contests: Record<string, ContestEntry>;
}

export interface InterpretationRequest {
  outcome: "found" | "not_found";
  interpretation?: InterpretationJson;
  note?: string;
}
