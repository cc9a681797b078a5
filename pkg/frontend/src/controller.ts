// Review session state machine, deliberately DOM-free so the whole flow is
// testable headless. The view subscribes to change notifications and reads
// the public state.

import { ApiClient, ApiError } from './api';
import { validateSpans } from './offsets';
import { coveringTokens, tokenize, type Token } from './tokenize';
import {
  CATEGORIES,
  type Category,
  type DecisionWire,
  type Progress,
  type ReviewItemWire,
  type SpanWire,
} from './types';

export interface EditSpan {
  firstToken: number; // inclusive token index
  lastToken: number; // inclusive token index
  label: Category | null;
}

export interface EditState {
  tokens: Token[];
  spans: EditSpan[];
  active: number;
}

export interface Banner {
  message: string;
  retriable: boolean;
}

interface PendingSubmission {
  item: ReviewItemWire;
  decision: DecisionWire;
  cursorBefore: number;
}

export interface ControllerOptions {
  reviewer?: string;
  pageSize?: number;
  now?: () => string;
}

const REFILL_THRESHOLD = 3;

export class ReviewController {
  items: ReviewItemWire[] = [];
  cursor = 0;
  progress: Progress = { decided: 0, total: 0 };
  /** ids acknowledged by the server — never shown as saved before the ack */
  saved = new Set<string>();
  /** ids submitted and awaiting acknowledgement */
  inFlight = new Set<string>();
  banner: Banner | null = null;
  edit: EditState | null = null;
  exhausted = false;

  private failed: PendingSubmission | null = null;
  private readonly reviewer: string;
  private readonly pageSize: number;
  private readonly now: () => string;
  private readonly listeners: Array<() => void> = [];

  constructor(
    private readonly api: ApiClient,
    options: ControllerOptions = {},
  ) {
    this.reviewer = options.reviewer ?? 'reviewer';
    this.pageSize = options.pageSize ?? 20;
    this.now = options.now ?? (() => new Date().toISOString());
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async start(): Promise<void> {
    await this.refreshProgress();
    await this.refill(true);
    this.notify();
  }

  current(): ReviewItemWire | null {
    return this.items[this.cursor] ?? null;
  }

  remaining(): number {
    return this.items.filter((i) => !this.saved.has(i.id) && !this.inFlight.has(i.id))
      .length;
  }

  next(): void {
    if (this.cursor < this.items.length - 1) {
      this.cursor += 1;
      this.edit = null;
      this.notify();
    }
    void this.refill();
  }

  previous(): void {
    if (this.cursor > 0) {
      this.cursor -= 1;
      this.edit = null;
      this.notify();
    }
  }

  async accept(): Promise<void> {
    await this.submit('accept');
  }

  async reject(): Promise<void> {
    await this.submit('reject');
  }

  async retry(): Promise<void> {
    const failed = this.failed;
    if (!failed) return;
    this.failed = null;
    this.banner = null;
    await this.send(failed);
  }

  dismissBanner(): void {
    this.banner = null;
    this.failed = null;
    this.notify();
  }

  // ----- edit mode -----------------------------------------------------

  enterEdit(): void {
    const item = this.current();
    if (!item) return;
    const tokens = tokenize(item.text);
    const spans: EditSpan[] = [];
    for (const span of item.spans) {
      const covered = coveringTokens(tokens, span.start, span.end);
      if (covered) {
        spans.push({ firstToken: covered.first, lastToken: covered.last, label: span.label });
      }
    }
    this.edit = { tokens, spans, active: spans.length ? 0 : -1 };
    this.notify();
  }

  cancelEdit(): void {
    this.edit = null;
    this.notify();
  }

  selectSpan(index: number): void {
    if (this.edit && index >= -1 && index < this.edit.spans.length) {
      this.edit.active = index;
      this.notify();
    }
  }

  cycleSpan(): void {
    if (this.edit && this.edit.spans.length) {
      this.edit.active = (this.edit.active + 1) % this.edit.spans.length;
      this.notify();
    }
  }

  private activeSpan(): EditSpan | null {
    if (!this.edit || this.edit.active < 0) return null;
    return this.edit.spans[this.edit.active] ?? null;
  }

  /** Move one boundary of the active span by whole tokens; the move is
   * refused rather than clamped when it would cross another span. */
  moveBoundary(which: 'start' | 'end', delta: -1 | 1): void {
    const edit = this.edit;
    const span = this.activeSpan();
    if (!edit || !span) return;
    const target =
      which === 'start' ? span.firstToken + delta : span.lastToken + delta;
    this.setBoundaryToken(which, target);
  }

  /** Snap a boundary of the active span to a specific token (drag target). */
  setBoundaryToken(which: 'start' | 'end', tokenIndex: number): void {
    const edit = this.edit;
    const span = this.activeSpan();
    if (!edit || !span) return;
    if (tokenIndex < 0 || tokenIndex >= edit.tokens.length) return;
    const candidate: EditSpan =
      which === 'start'
        ? { ...span, firstToken: Math.min(tokenIndex, span.lastToken) }
        : { ...span, lastToken: Math.max(tokenIndex, span.firstToken) };
    const others = edit.spans.filter((_, i) => i !== edit.active);
    const collides = others.some(
      (other) =>
        candidate.firstToken <= other.lastToken &&
        other.firstToken <= candidate.lastToken,
    );
    if (!collides) {
      edit.spans[edit.active] = candidate;
      this.notify();
    }
  }

  setLabel(label: Category): void {
    const span = this.activeSpan();
    if (!span || !(CATEGORIES as readonly string[]).includes(label)) return;
    span.label = label;
    this.notify();
  }

  addSpanAtToken(tokenIndex: number): void {
    const edit = this.edit;
    if (!edit) return;
    if (tokenIndex < 0 || tokenIndex >= edit.tokens.length) return;
    const taken = edit.spans.some(
      (s) => s.firstToken <= tokenIndex && tokenIndex <= s.lastToken,
    );
    if (taken) return;
    edit.spans.push({ firstToken: tokenIndex, lastToken: tokenIndex, label: null });
    edit.spans.sort((a, b) => a.firstToken - b.firstToken);
    edit.active = edit.spans.findIndex(
      (s) => s.firstToken === tokenIndex && s.lastToken === tokenIndex,
    );
    this.notify();
  }

  removeActiveSpan(): void {
    const edit = this.edit;
    if (!edit || edit.active < 0) return;
    edit.spans.splice(edit.active, 1);
    edit.active = edit.spans.length ? 0 : -1;
    this.notify();
  }

  /** Current edit state as wire spans (token ranges -> code points). */
  editedSpans(): SpanWire[] {
    const edit = this.edit;
    if (!edit) return [];
    return edit.spans
      .map((s) => ({
        start: edit.tokens[s.firstToken]!.start,
        end: edit.tokens[s.lastToken]!.end,
        label: s.label,
      }))
      .sort((a, b) => a.start - b.start);
  }

  async submitEdit(): Promise<void> {
    const item = this.current();
    if (!item || !this.edit) return;
    const spans = this.editedSpans();
    const problem = validateSpans(item.text, spans);
    if (problem) {
      this.banner = { message: `invalid spans: ${problem}`, retriable: false };
      this.notify();
      return;
    }
    await this.submit('edit', spans);
  }

  // ----- submission ----------------------------------------------------

  private async submit(
    action: 'accept' | 'reject' | 'edit',
    editedSpans?: SpanWire[],
  ): Promise<void> {
    const item = this.current();
    if (!item || this.inFlight.has(item.id)) return;
    const decision: DecisionWire = {
      action,
      reviewer: this.reviewer,
      timestamp: this.now(),
      ...(action === 'edit' ? { edited_spans: editedSpans ?? [] } : {}),
    };
    const submission: PendingSubmission = {
      item,
      decision,
      cursorBefore: this.cursor,
    };
    // optimistic advance: move on immediately, roll back on server error
    this.edit = null;
    if (this.cursor < this.items.length - 1) this.cursor += 1;
    await this.send(submission);
    void this.refill();
  }

  private async send(submission: PendingSubmission): Promise<void> {
    const { item, decision } = submission;
    this.inFlight.add(item.id);
    this.banner = null;
    this.notify();
    try {
      const response = await this.api.decide(item.id, decision);
      this.saved.add(item.id);
      this.progress = { decided: response.decided, total: response.total };
    } catch (error) {
      // rollback: the decision is not saved; return to the item
      this.cursor = submission.cursorBefore;
      this.failed = submission;
      const retriable = error instanceof ApiError ? error.retriable : true;
      const message =
        error instanceof ApiError ? error.message : 'unexpected error';
      this.banner = {
        message: `decision for ${item.id} not saved: ${message}`,
        retriable,
      };
    } finally {
      this.inFlight.delete(item.id);
      this.notify();
    }
  }

  private async refreshProgress(): Promise<void> {
    this.progress = await this.api.progress();
  }

  private async refill(force = false): Promise<void> {
    if (this.exhausted && !force) {
      return;
    }
    const unseen = this.items.length - this.cursor - 1;
    if (!force && unseen >= REFILL_THRESHOLD) return;
    // our undecided items form a prefix of the server's pending list; an
    // undershot offset only yields duplicates, which are filtered below
    const offset = Math.max(
      0,
      this.items.length - this.saved.size - this.inFlight.size,
    );
    const known = new Set(this.items.map((i) => i.id));
    const page = await this.api.pendingItems(offset, this.pageSize);
    let added = 0;
    for (const item of page.items) {
      if (!known.has(item.id) && !this.saved.has(item.id)) {
        this.items.push(item);
        added += 1;
      }
    }
    this.exhausted = added === 0 && page.items.length < this.pageSize;
    if (added) this.notify();
  }
}
