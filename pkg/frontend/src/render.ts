// DOM rendering. In review mode the sentence is rendered from code-point
// exact segments; in edit mode it is rendered token-by-token so span
// boundaries can be dragged across token edges.

import type { ReviewController } from './controller';
import { cpToUtf16, segmentText } from './offsets';
import { CATEGORY_NAMES, type Category, type ReviewItemWire, type SpanWire } from './types';

export const CATEGORY_COLORS: Record<Category, string> = {
  gender: '#e5d4f5',
  ethnicity: '#cdeeda',
  sexual_orientation: '#fbe0cb',
  religion: '#cfe0f5',
};

const UNTYPED_COLOR = '#e2e2e2';

export function spanColor(label: Category | null): string {
  return label ? CATEGORY_COLORS[label] : UNTYPED_COLOR;
}

export interface Refs {
  root: HTMLElement;
  sentence: HTMLElement;
  provenance: HTMLElement;
  progress: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
}

export function findRefs(document: Document): Refs {
  const get = (id: string): HTMLElement => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  return {
    root: get('app'),
    sentence: get('sentence'),
    provenance: get('provenance'),
    progress: get('progress'),
    banner: get('banner'),
    status: get('status'),
  };
}

function makeMark(
  doc: Document,
  span: SpanWire,
  spanIndex: number,
  active: boolean,
): HTMLElement {
  const mark = doc.createElement('mark');
  mark.className = 'span-highlight' + (active ? ' active' : '');
  mark.style.backgroundColor = spanColor(span.label);
  mark.dataset.spanIndex = String(spanIndex);
  mark.dataset.label = span.label ?? 'untyped';
  mark.title = span.label ? CATEGORY_NAMES[span.label] : 'mention (untyped)';
  return mark;
}

/** Review mode: plain segments and <mark> segments, code-point exact. */
function renderSegments(refs: Refs, item: ReviewItemWire): void {
  const doc = refs.sentence.ownerDocument;
  for (const segment of segmentText(item.text, item.spans)) {
    if (segment.span === null) {
      refs.sentence.appendChild(doc.createTextNode(segment.text));
    } else {
      const mark = makeMark(doc, segment.span, segment.spanIndex!, false);
      mark.textContent = segment.text;
      refs.sentence.appendChild(mark);
    }
  }
}

/** Edit mode: one element per token (drag targets), grouped into marks.
 * Edited spans are token-aligned by construction, so marks always open at
 * a token start and close at a token end. */
function renderEditable(controller: ReviewController, refs: Refs, item: ReviewItemWire): void {
  const edit = controller.edit!;
  const doc = refs.sentence.ownerDocument;
  const spans = controller.editedSpans();
  let openMark: HTMLElement | null = null;
  let openIndex = -1;
  let utf16 = 0;

  edit.tokens.forEach((token, tokenIndex) => {
    const tokenStart = cpToUtf16(item.text, token.start);
    const spanIndex = spans.findIndex(
      (s) => s.start <= token.start && token.start < s.end,
    );
    if (openIndex !== spanIndex) {
      openMark = null;
      openIndex = -1;
    }
    // whitespace before the token stays inside the mark only when the same
    // span continues across it
    const gap = item.text.slice(utf16, tokenStart);
    if (gap) {
      (openMark ?? refs.sentence).appendChild(doc.createTextNode(gap));
    }
    if (spanIndex >= 0 && openMark === null) {
      openMark = makeMark(doc, spans[spanIndex]!, spanIndex, edit.active === spanIndex);
      openIndex = spanIndex;
      refs.sentence.appendChild(openMark);
    }
    const el = doc.createElement('span');
    el.className = 'token';
    el.dataset.token = String(tokenIndex);
    el.textContent = token.surface;
    (openMark ?? refs.sentence).appendChild(el);
    utf16 = tokenStart + token.surface.length;
    if (spanIndex >= 0 && spans[spanIndex]!.end === token.end) {
      openMark = null;
      openIndex = -1;
    }
  });
  const tail = item.text.slice(utf16);
  if (tail) refs.sentence.appendChild(doc.createTextNode(tail));
}

function renderProvenance(refs: Refs, item: ReviewItemWire): void {
  const doc = refs.provenance.ownerDocument;
  refs.provenance.textContent = '';
  const labels = new Set<string>();
  for (const p of item.provenance) {
    for (const l of p.sentence_labels) labels.add(l);
  }
  const header = doc.createElement('div');
  header.className = 'prov-labels';
  header.textContent = labels.size
    ? `sentence ground truth: ${[...labels].sort().join(', ')}`
    : 'sentence ground truth: (none)';
  refs.provenance.appendChild(header);
  for (const p of item.provenance) {
    const row = doc.createElement('div');
    row.className = 'prov-row';
    row.textContent =
      `[${p.start}, ${p.end}) predicted ${p.predicted} (p=${p.probability.toFixed(3)})`;
    refs.provenance.appendChild(row);
  }
}

export function render(controller: ReviewController, refs: Refs): void {
  const item = controller.current();
  const { decided, total } = controller.progress;
  refs.progress.textContent = `${decided} / ${total} decided`;

  refs.banner.textContent = '';
  refs.banner.classList.toggle('hidden', controller.banner === null);
  if (controller.banner) {
    const doc = refs.banner.ownerDocument;
    refs.banner.appendChild(doc.createTextNode(controller.banner.message + ' '));
    if (controller.banner.retriable) {
      const retry = doc.createElement('button');
      retry.id = 'retry';
      retry.textContent = 'Retry';
      retry.addEventListener('click', () => void controller.retry());
      refs.banner.appendChild(retry);
    }
    const dismiss = doc.createElement('button');
    dismiss.id = 'dismiss';
    dismiss.textContent = 'Dismiss';
    dismiss.addEventListener('click', () => controller.dismissBanner());
    refs.banner.appendChild(dismiss);
  }

  refs.sentence.textContent = '';
  if (!item) {
    refs.sentence.textContent = controller.exhausted ? 'Queue complete.' : 'Loading…';
    refs.provenance.textContent = '';
    refs.status.textContent = '';
    return;
  }

  if (controller.edit) {
    renderEditable(controller, refs, item);
  } else {
    renderSegments(refs, item);
  }
  renderProvenance(refs, item);

  const state = controller.saved.has(item.id)
    ? 'saved'
    : controller.inFlight.has(item.id)
      ? 'saving…'
      : controller.edit
        ? 'editing'
        : 'pending';
  refs.status.textContent = `${item.id} — ${state}`;
  refs.root.dataset.mode = controller.edit ? 'edit' : 'review';
}

let dragBoundary: 'start' | 'end' | null = null;

/** Mouse dragging: press inside a highlight near one of its edges, then
 * sweep across tokens; each token entered snaps that boundary to it. */
export function attachDragHandlers(controller: ReviewController, refs: Refs): void {
  refs.sentence.addEventListener('mousedown', (event) => {
    if (!controller.edit) return;
    const target = event.target as HTMLElement;
    const mark = target.closest('mark');
    const tokenEl = target.closest('.token') as HTMLElement | null;
    if (!mark || !tokenEl) return;
    const spanIndex = Number(mark.dataset.spanIndex);
    controller.selectSpan(spanIndex);
    const span = controller.editedSpans()[spanIndex];
    const token = controller.edit.tokens[Number(tokenEl.dataset.token)];
    if (!span || !token) return;
    dragBoundary = token.start < (span.start + span.end) / 2 ? 'start' : 'end';
    event.preventDefault();
  });
  refs.sentence.addEventListener('mouseover', (event) => {
    if (!dragBoundary || !controller.edit) return;
    const tokenEl = (event.target as HTMLElement).closest(
      '.token',
    ) as HTMLElement | null;
    if (!tokenEl) return;
    controller.setBoundaryToken(dragBoundary, Number(tokenEl.dataset.token));
  });
  refs.sentence.ownerDocument.addEventListener('mouseup', () => {
    dragBoundary = null;
  });
  // click on an uncovered token: start a new span there
  refs.sentence.addEventListener('click', (event) => {
    if (!controller.edit) return;
    const target = event.target as HTMLElement;
    if (target.closest('mark')) return;
    const tokenEl = target.closest('.token') as HTMLElement | null;
    if (tokenEl) controller.addSpanAtToken(Number(tokenEl.dataset.token));
  });
}
