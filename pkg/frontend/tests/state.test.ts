import { describe, expect, it } from 'vitest';

import type { Diagnosis } from '../src/api.js';
import {
  acceptProposal,
  applyAugment,
  applyScore,
  applyScoreError,
  beginAugment,
  beginScore,
  displayIsConsistent,
  editText,
  HISTORY_LIMIT,
  initialState,
  rejectProposal,
} from '../src/state.js';

const CONFIG = {
  goal_amount: 5000,
  organizer_male: false,
  has_beneficiary: false,
  city: 'Austin',
  state: 'TX',
};

function diagnosis(probability: number, met = false): Diagnosis {
  return {
    predicted_probability: probability,
    checklist: {
      gratitude_expressed: met,
      urgency_explained: met,
      match_grant_mentioned: met,
    },
    top_feature_contributions: [],
    lexical: { word_count: 10, fk_grade: 4.2, contains_spam: false },
  };
}

describe('scoring flow', () => {
  it('applies the response and appends a history snapshot', () => {
    let state = initialState('draft one', CONFIG);
    const [pending, seq] = beginScore(state);
    expect(pending.scoreInFlight).toBe(true);
    state = applyScore(pending, seq, 'draft one', diagnosis(0.42));
    expect(state.diagnosis?.predicted_probability).toBe(0.42);
    expect(state.history).toEqual([{ text: 'draft one', probability: 0.42 }]);
    expect(state.scoreInFlight).toBe(false);
    expect(displayIsConsistent(state)).toBe(true);
  });

  it('discards stale responses by sequence number', async () => {
    // delayed-response double: the first request resolves after the second
    let state = initialState('v1', CONFIG);
    const [s1, seq1] = beginScore(state);
    state = editText(s1, 'v2');
    const [s2, seq2] = beginScore(state);
    state = s2;

    const slowFirst = new Promise<Diagnosis>((resolve) =>
      setTimeout(() => resolve(diagnosis(0.11)), 30)
    );
    const fastSecond = new Promise<Diagnosis>((resolve) =>
      setTimeout(() => resolve(diagnosis(0.99)), 5)
    );

    state = applyScore(state, seq2, 'v2', await fastSecond);
    expect(state.diagnosis?.predicted_probability).toBe(0.99);
    state = applyScore(state, seq1, 'v1', await slowFirst);
    // the late early response must not overwrite the newer one
    expect(state.diagnosis?.predicted_probability).toBe(0.99);
    expect(state.history).toHaveLength(1);
  });

  it('keeps the draft when the service errors', () => {
    let state = initialState('my careful draft', CONFIG);
    const [pending, seq] = beginScore(state);
    state = applyScoreError(pending, seq, 'service unreachable');
    expect(state.text).toBe('my careful draft');
    expect(state.error).toBe('service unreachable');
    expect(state.scoreInFlight).toBe(false);
  });

  it('caps history at 50 snapshots, evicting the oldest', () => {
    let state = initialState('t', CONFIG);
    for (let i = 0; i < HISTORY_LIMIT + 8; i += 1) {
      const [pending, seq] = beginScore(state);
      state = applyScore(pending, seq, `t${i}`, diagnosis(i / 100));
    }
    expect(state.history).toHaveLength(HISTORY_LIMIT);
    expect(state.history[0].text).toBe('t8');
  });
});

describe('augmentation proposal', () => {
  function stateWithProposal() {
    let state = initialState('original text.', CONFIG);
    const [scored, seq] = beginScore(state);
    state = applyScore(scored, seq, 'original text.', diagnosis(0.3));
    const [pending, aseq] = beginAugment(state);
    state = applyAugment(pending, aseq, {
      text: 'original text. Added gratitude.',
      before: diagnosis(0.3),
      after: diagnosis(0.65, true),
    });
    return state;
  }

  it('accept replaces the editor text and clears the proposal', () => {
    let state = stateWithProposal();
    state = acceptProposal(state);
    expect(state.text).toBe('original text. Added gratitude.');
    expect(state.proposal).toBeNull();
    expect(state.diagnosis?.predicted_probability).toBe(0.65);
    expect(state.diagnosis?.checklist.gratitude_expressed).toBe(true);
    expect(displayIsConsistent(state)).toBe(true);
  });

  it('reject leaves the text unchanged', () => {
    let state = stateWithProposal();
    const before = state.text;
    state = rejectProposal(state);
    expect(state.text).toBe(before);
    expect(state.proposal).toBeNull();
  });

  it('stale augmentation responses are discarded', () => {
    let state = initialState('text.', CONFIG);
    const [p1, seq1] = beginAugment(state);
    const [p2, seq2] = beginAugment(p1);
    state = applyAugment(p2, seq1, {
      text: 'stale.',
      before: diagnosis(0.2),
      after: diagnosis(0.5),
    });
    expect(state.proposal).toBeNull(); // seq1 < seq2: ignored
    state = applyAugment(state, seq2, {
      text: 'fresh.',
      before: diagnosis(0.2),
      after: diagnosis(0.6),
    });
    expect(state.proposal?.text).toBe('fresh.');
  });
});
