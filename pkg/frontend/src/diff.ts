// Sentence-level diff for the proposal view. The augmentation contract
// guarantees the proposal starts with the original text verbatim, so the
// interesting case is a pure suffix of added sentences; the general path
// still marks any sentence missing from the proposal.

export interface DiffSegment {
  text: string;
  kind: 'same' | 'added' | 'removed';
}

const SENTENCE_RE = /[^.!?]+[.!?]*\s*/g;

export function splitSentences(text: string): string[] {
  const parts = text.match(SENTENCE_RE) ?? [];
  return parts.map((s) => s.trim()).filter((s) => s.length > 0);
}

export function sentenceDiff(original: string, proposal: string): DiffSegment[] {
  if (proposal.startsWith(original)) {
    const segments: DiffSegment[] = [];
    if (original.length > 0) {
      segments.push({ text: original, kind: 'same' });
    }
    const suffix = proposal.slice(original.length).trim();
    for (const sentence of splitSentences(suffix)) {
      segments.push({ text: sentence, kind: 'added' });
    }
    return segments;
  }
  const originalSentences = splitSentences(original);
  const proposalSentences = splitSentences(proposal);
  const proposalSet = new Set(proposalSentences);
  const originalSet = new Set(originalSentences);
  const segments: DiffSegment[] = [];
  for (const s of originalSentences) {
    segments.push({ text: s, kind: proposalSet.has(s) ? 'same' : 'removed' });
  }
  for (const s of proposalSentences) {
    if (!originalSet.has(s)) {
      segments.push({ text: s, kind: 'added' });
    }
  }
  return segments;
}

/** Every original sentence should appear in the proposal (the server's
 * prefix invariant, visualized). */
export function prefixInvariantHolds(segments: DiffSegment[]): boolean {
  return segments.every((s) => s.kind !== 'removed');
}
