// Span offsets are Unicode code points; JavaScript strings are UTF-16.
// Everything that touches the DOM goes through these conversions so
// highlights stay exact even with astral characters in the text.

import { CATEGORIES, type SpanWire } from './types';

/** UTF-16 index of the code point at `cpOffset` (equals the full string
 * length when cpOffset >= the number of code points). */
export function cpToUtf16(text: string, cpOffset: number): number {
  let cp = 0;
  let i = 0;
  while (i < text.length && cp < cpOffset) {
    const code = text.codePointAt(i)!;
    i += code > 0xffff ? 2 : 1;
    cp += 1;
  }
  return i;
}

export function cpLength(text: string): number {
  let n = 0;
  for (let i = 0; i < text.length; ) {
    i += text.codePointAt(i)! > 0xffff ? 2 : 1;
    n += 1;
  }
  return n;
}

export function cpSlice(text: string, startCp: number, endCp: number): string {
  return text.slice(cpToUtf16(text, startCp), cpToUtf16(text, endCp));
}

export interface Segment {
  text: string;
  /** index into the span list, or null for plain text between spans */
  spanIndex: number | null;
  span: SpanWire | null;
}

/** Split text into alternating plain/highlighted segments. Spans must be
 * sorted and non-overlapping (validate first). */
export function segmentText(text: string, spans: SpanWire[]): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  spans.forEach((span, index) => {
    if (span.start > cursor) {
      segments.push({ text: cpSlice(text, cursor, span.start), spanIndex: null, span: null });
    }
    segments.push({ text: cpSlice(text, span.start, span.end), spanIndex: index, span });
    cursor = span.end;
  });
  const total = cpLength(text);
  if (cursor < total) {
    segments.push({ text: cpSlice(text, cursor, total), spanIndex: null, span: null });
  }
  return segments;
}

/** Returns an error message, or null when the span set is valid for the
 * text: in bounds, non-empty, sorted, non-overlapping, known labels. */
export function validateSpans(text: string, spans: SpanWire[]): string | null {
  const total = cpLength(text);
  let previousEnd = 0;
  for (const span of spans) {
    if (!(Number.isInteger(span.start) && Number.isInteger(span.end))) {
      return 'span offsets must be integers';
    }
    if (span.start < 0 || span.start >= span.end || span.end > total) {
      return `invalid span range [${span.start}, ${span.end})`;
    }
    if (span.start < previousEnd) {
      return 'spans overlap or are out of order';
    }
    if (span.label !== null && !(CATEGORIES as readonly string[]).includes(span.label)) {
      return `unknown label ${String(span.label)}`;
    }
    previousEnd = span.end;
  }
  return null;
}
