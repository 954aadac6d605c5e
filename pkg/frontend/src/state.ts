// Draft state and pure transitions. Responses are applied only when their
// sequence number is still the latest issued for that request kind, so a
// slow early response can never overwrite a newer one. History is
// append-only and capped at 50 snapshots (oldest evicted).

import type { Diagnosis, DraftConfig } from './api.js';

export const HISTORY_LIMIT = 50;

export interface Snapshot {
  text: string;
  probability: number;
}

export interface Proposal {
  text: string;
  before: Diagnosis;
  after: Diagnosis;
}

export interface DraftState {
  text: string;
  config: DraftConfig;
  diagnosis: Diagnosis | null;
  /** text the current diagnosis was computed for */
  diagnosedText: string | null;
  proposal: Proposal | null;
  history: Snapshot[];
  scoreSeq: number;
  augmentSeq: number;
  scoreInFlight: boolean;
  augmentInFlight: boolean;
  error: string | null;
}

export function initialState(text: string, config: DraftConfig): DraftState {
  return {
    text,
    config,
    diagnosis: null,
    diagnosedText: null,
    proposal: null,
    history: [],
    scoreSeq: 0,
    augmentSeq: 0,
    scoreInFlight: false,
    augmentInFlight: false,
    error: null,
  };
}

export function editText(state: DraftState, text: string): DraftState {
  return { ...state, text };
}

/** Start a score request; returns the new state and the sequence number to tag it with. */
export function beginScore(state: DraftState): [DraftState, number] {
  const seq = state.scoreSeq + 1;
  return [{ ...state, scoreSeq: seq, scoreInFlight: true, error: null }, seq];
}

export function applyScore(
  state: DraftState,
  seq: number,
  scoredText: string,
  diagnosis: Diagnosis
): DraftState {
  if (seq !== state.scoreSeq) {
    return state; // stale response: a newer request was issued after this one
  }
  const history = [
    ...state.history,
    { text: scoredText, probability: diagnosis.predicted_probability },
  ].slice(-HISTORY_LIMIT);
  return {
    ...state,
    diagnosis,
    diagnosedText: scoredText,
    history,
    scoreInFlight: false,
    error: null,
  };
}

export function applyScoreError(state: DraftState, seq: number, message: string): DraftState {
  if (seq !== state.scoreSeq) {
    return state;
  }
  return { ...state, scoreInFlight: false, error: message };
}

export function beginAugment(state: DraftState): [DraftState, number] {
  const seq = state.augmentSeq + 1;
  return [{ ...state, augmentSeq: seq, augmentInFlight: true, error: null }, seq];
}

export function applyAugment(state: DraftState, seq: number, proposal: Proposal): DraftState {
  if (seq !== state.augmentSeq) {
    return state;
  }
  return { ...state, proposal, augmentInFlight: false, error: null };
}

export function applyAugmentError(state: DraftState, seq: number, message: string): DraftState {
  if (seq !== state.augmentSeq) {
    return state;
  }
  return { ...state, augmentInFlight: false, error: message };
}

/** Accept the pending proposal: the editor takes the augmented text, the
 * proposal's after-diagnosis becomes current, and the proposal clears.
 * The caller should rescore afterwards; the round-trip must reproduce the
 * same probability (same text, same model). */
export function acceptProposal(state: DraftState): DraftState {
  if (!state.proposal) {
    return state;
  }
  const { text, after } = state.proposal;
  const history = [
    ...state.history,
    { text, probability: after.predicted_probability },
  ].slice(-HISTORY_LIMIT);
  return {
    ...state,
    text,
    diagnosis: after,
    diagnosedText: text,
    proposal: null,
    history,
  };
}

export function rejectProposal(state: DraftState): DraftState {
  return { ...state, proposal: null };
}

/** True when the shown probability belongs to the shown text. */
export function displayIsConsistent(state: DraftState): boolean {
  return state.diagnosis === null || state.diagnosedText === state.text;
}
