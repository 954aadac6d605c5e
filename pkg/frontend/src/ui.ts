// HTML renderers for the co-pilot panels. Pure string builders so the
// display logic is unit-testable; main.ts mounts them into the page.

import type { Diagnosis } from './api.js';
import { sentenceDiff, prefixInvariantHolds } from './diff.js';
import type { DraftState } from './state.js';

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function formatProbability(p: number): string {
  return `${(100 * p).toFixed(1)}%`;
}

export function renderGauge(diagnosis: Diagnosis | null, inFlight: boolean): string {
  if (inFlight) {
    return `<div class="gauge pending" data-role="gauge">scoring&hellip;</div>`;
  }
  if (!diagnosis) {
    return `<div class="gauge empty" data-role="gauge">not scored yet</div>`;
  }
  const p = diagnosis.predicted_probability;
  return (
    `<div class="gauge" data-role="gauge" data-probability="${p}">` +
    `<span class="value">${formatProbability(p)}</span>` +
    `<span class="label">predicted funding probability</span></div>`
  );
}

const STRATEGY_LABELS: Array<[keyof Diagnosis['checklist'], string]> = [
  ['gratitude_expressed', 'Express gratitude to donors'],
  ['urgency_explained', 'Explain the urgency of the need'],
  ['match_grant_mentioned', 'Acknowledge the $500 matching grant'],
];

export function renderChecklist(diagnosis: Diagnosis | null): string {
  if (!diagnosis) {
    return `<ul class="checklist" data-role="checklist"></ul>`;
  }
  const items = STRATEGY_LABELS.map(([key, label]) => {
    const met = diagnosis.checklist[key];
    return (
      `<li class="${met ? 'met' : 'unmet'}" data-flag="${key}" data-met="${met}">` +
      `${met ? '&#10003;' : '&#9675;'} ${label}</li>`
    );
  });
  const lex = diagnosis.lexical;
  items.push(
    `<li class="diagnostic">words: ${lex.word_count}</li>`,
    `<li class="diagnostic">reading grade: ${lex.fk_grade.toFixed(1)}</li>`
  );
  if (lex.contains_spam) {
    items.push(`<li class="warning" data-flag="spam">spam-like wording detected</li>`);
  }
  const contributions = diagnosis.top_feature_contributions
    .map(
      (c) =>
        `<li class="contribution">${escapeHtml(c.feature)} ` +
        `(${(100 * c.gain_share).toFixed(1)}%)</li>`
    )
    .join('');
  return (
    `<ul class="checklist" data-role="checklist">${items.join('')}</ul>` +
    `<ul class="contributions" data-role="contributions">${contributions}</ul>`
  );
}

export function renderProposal(state: DraftState): string {
  if (!state.proposal) {
    return `<div class="proposal empty" data-role="proposal"></div>`;
  }
  const { text, before, after } = state.proposal;
  const segments = sentenceDiff(state.text, text);
  const body = segments
    .map((s) => `<span class="segment ${s.kind}">${escapeHtml(s.text)}</span>`)
    .join(' ');
  const invariant = prefixInvariantHolds(segments)
    ? ''
    : `<p class="warning">proposal dropped original sentences</p>`;
  return (
    `<div class="proposal" data-role="proposal">` +
    `<div class="compare">` +
    `<span data-role="before-prob">${formatProbability(before.predicted_probability)}</span>` +
    ` &rarr; ` +
    `<span data-role="after-prob">${formatProbability(after.predicted_probability)}</span>` +
    `</div>${invariant}<div class="diff">${body}</div>` +
    `<button data-action="accept">Accept</button>` +
    `<button data-action="reject">Reject</button></div>`
  );
}

export function renderError(error: string | null): string {
  if (!error) {
    return `<div class="banner" data-role="error" hidden></div>`;
  }
  return `<div class="banner error" data-role="error">${escapeHtml(error)}</div>`;
}

export function renderHistory(state: DraftState): string {
  const items = state.history
    .map(
      (snap, i) =>
        `<li data-index="${i}">${formatProbability(snap.probability)} ` +
        `&mdash; ${escapeHtml(snap.text.slice(0, 60))}&hellip;</li>`
    )
    .join('');
  return `<ol class="history" data-role="history">${items}</ol>`;
}
