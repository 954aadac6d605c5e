// Page wiring: one in-flight score and one in-flight augmentation at most;
// every displayed number comes from a service response.

import { ServiceClient, ServiceError } from './api.js';
import {
  acceptProposal,
  applyAugment,
  applyAugmentError,
  applyScore,
  applyScoreError,
  beginAugment,
  beginScore,
  DraftState,
  editText,
  initialState,
  rejectProposal,
} from './state.js';
import { renderChecklist, renderError, renderGauge, renderHistory, renderProposal } from './ui.js';

const BASE_URL =
  new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8200';

const client = new ServiceClient(BASE_URL);

let state: DraftState = initialState('', {
  goal_amount: 5000,
  organizer_male: false,
  has_beneficiary: false,
  city: '',
  state: '',
});

function $(selector: string): HTMLElement {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as HTMLElement;
}

function render(): void {
  $('#gauge-slot').innerHTML = renderGauge(state.diagnosis, state.scoreInFlight);
  $('#checklist-slot').innerHTML = renderChecklist(state.diagnosis);
  $('#proposal-slot').innerHTML = renderProposal(state);
  $('#error-slot').innerHTML = renderError(state.error);
  $('#history-slot').innerHTML = renderHistory(state);
  const editor = $('#editor') as HTMLTextAreaElement;
  if (editor.value !== state.text) {
    editor.value = state.text;
  }
  const augmentButton = $('#augment-button') as HTMLButtonElement;
  augmentButton.disabled = state.diagnosis === null || state.augmentInFlight;
  for (const button of document.querySelectorAll('[data-action]')) {
    button.addEventListener('click', (event: Event) => {
      const action = (event.currentTarget as HTMLElement).dataset.action;
      if (action === 'accept') {
        state = acceptProposal(state);
        render();
        void scoreNow(); // round-trip: rescoring must reproduce the after-probability
      } else if (action === 'reject') {
        state = rejectProposal(state);
        render();
      }
    });
  }
}

function draftConfig() {
  const goal = parseFloat(($('#goal') as HTMLInputElement).value) || 5000;
  return {
    ...state.config,
    goal_amount: goal,
    city: ($('#city') as HTMLInputElement).value,
    state: ($('#state') as HTMLInputElement).value,
  };
}

async function scoreNow(): Promise<void> {
  const text = state.text;
  const [next, seq] = beginScore(state);
  state = next;
  render();
  try {
    const diagnosis = await client.score(text, draftConfig());
    state = applyScore(state, seq, text, diagnosis);
  } catch (err) {
    const message = err instanceof ServiceError ? err.message : `service unreachable: ${err}`;
    state = applyScoreError(state, seq, message);
  }
  render();
}

async function augmentNow(): Promise<void> {
  if (state.augmentInFlight) return;
  const text = state.text;
  const [next, seq] = beginAugment(state);
  state = next;
  render();
  try {
    const resp = await client.augment(text, draftConfig());
    state = applyAugment(state, seq, {
      text: resp.augmented_text,
      before: resp.before,
      after: resp.after,
    });
  } catch (err) {
    const message = err instanceof ServiceError ? err.message : `service unreachable: ${err}`;
    state = applyAugmentError(state, seq, message);
  }
  render();
}

export function boot(): void {
  const editor = $('#editor') as HTMLTextAreaElement;
  editor.addEventListener('input', () => {
    state = editText(state, editor.value);
  });
  $('#score-button').addEventListener('click', () => void scoreNow());
  $('#augment-button').addEventListener('click', () => void augmentNow());
  render();
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  boot();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', boot);
}
