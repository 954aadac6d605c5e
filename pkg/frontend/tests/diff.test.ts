import { describe, expect, it } from 'vitest';

import { prefixInvariantHolds, sentenceDiff, splitSentences } from '../src/diff.js';

describe('sentenceDiff', () => {
  it('marks the augmentation suffix as added sentences', () => {
    const original = 'We bake bread. The shop is small.';
    const proposal = `${original} Thank you for your support. Funds are urgent.`;
    const segments = sentenceDiff(original, proposal);
    expect(segments[0]).toEqual({ text: original, kind: 'same' });
    expect(segments.slice(1).map((s) => s.kind)).toEqual(['added', 'added']);
    expect(prefixInvariantHolds(segments)).toBe(true);
  });

  it('every original sentence is present in a prefix-preserving proposal', () => {
    const original = 'One. Two. Three.';
    const segments = sentenceDiff(original, `${original} Four.`);
    const sameText = segments.filter((s) => s.kind === 'same').map((s) => s.text);
    expect(sameText.join(' ')).toContain('One.');
  });

  it('flags dropped sentences when the prefix invariant is broken', () => {
    const segments = sentenceDiff('Keep me. Drop me.', 'Keep me. Brand new.');
    const removed = segments.filter((s) => s.kind === 'removed');
    expect(removed).toEqual([{ text: 'Drop me.', kind: 'removed' }]);
    expect(prefixInvariantHolds(segments)).toBe(false);
  });

  it('splitSentences keeps terminal punctuation', () => {
    expect(splitSentences('Hi there! Ok.')).toEqual(['Hi there!', 'Ok.']);
  });
});
