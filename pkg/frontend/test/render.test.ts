// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { ReviewController } from '../src/controller';
import { findRefs, render, type Refs } from '../src/render';
import { createServiceStub, makeItem } from './stub';

function mountDom(): Refs {
  document.body.innerHTML = `
    <div id="app" data-mode="review">
      <div id="progress"></div>
      <div id="banner" class="hidden"></div>
      <div id="sentence"></div>
      <div id="provenance"></div>
      <div id="status"></div>
    </div>`;
  return findRefs(document);
}

describe('highlight rendering', () => {
  let refs: Refs;

  beforeEach(() => {
    refs = mountDom();
  });

  it('selects exactly "black people" for span (8,20)', async () => {
    const stub = createServiceStub([
      makeItem('q1', 'inflame black people', [
        { start: 8, end: 20, label: 'ethnicity' },
      ]),
    ]);
    const controller = new ReviewController(new ApiClient('', stub.fetchFn));
    await controller.start();
    render(controller, refs);

    const marks = refs.sentence.querySelectorAll('mark');
    expect(marks.length).toBe(1);
    expect(marks[0]!.textContent).toBe('black people');
    expect(marks[0]!.dataset.label).toBe('ethnicity');
    expect(refs.sentence.textContent).toBe('inflame black people');
  });

  it('keeps highlights code-point exact with astral characters', async () => {
    const stub = createServiceStub([
      makeItem('q1', '🎉🎉 mock women daily', [
        { start: 8, end: 13, label: 'gender' },
      ]),
    ]);
    const controller = new ReviewController(new ApiClient('', stub.fetchFn));
    await controller.start();
    render(controller, refs);
    expect(refs.sentence.querySelector('mark')!.textContent).toBe('women');
  });

  it('renders token elements with mark grouping in edit mode', async () => {
    const stub = createServiceStub([
      makeItem('q1', 'inflame black people', [
        { start: 8, end: 20, label: 'ethnicity' },
      ]),
    ]);
    const controller = new ReviewController(new ApiClient('', stub.fetchFn));
    await controller.start();
    controller.enterEdit();
    render(controller, refs);

    const mark = refs.sentence.querySelector('mark')!;
    expect(mark.textContent).toBe('black people');
    const tokens = mark.querySelectorAll('.token');
    expect([...tokens].map((t) => t.textContent)).toEqual(['black', 'people']);
    expect(refs.sentence.textContent).toBe('inflame black people');
    expect(refs.root.dataset.mode).toBe('edit');
  });

  it('shows progress and saved status from acknowledged decisions only', async () => {
    const stub = createServiceStub([
      makeItem('q1', 'mock women daily', [{ start: 5, end: 10, label: 'gender' }]),
      makeItem('q2', 'calm words', []),
    ]);
    const controller = new ReviewController(new ApiClient('', stub.fetchFn));
    await controller.start();
    render(controller, refs);
    expect(refs.progress.textContent).toBe('0 / 2 decided');

    await controller.accept();
    render(controller, refs);
    expect(refs.progress.textContent).toBe('1 / 2 decided');

    controller.previous();
    render(controller, refs);
    expect(refs.status.textContent).toBe('q1 — saved');
  });

  it('shows a retry banner on network failure', async () => {
    const stub = createServiceStub([
      makeItem('q1', 'mock women daily', [{ start: 5, end: 10, label: 'gender' }]),
    ]);
    const controller = new ReviewController(new ApiClient('', stub.fetchFn));
    await controller.start();
    stub.failNext(1);
    await controller.accept();
    render(controller, refs);
    expect(refs.banner.classList.contains('hidden')).toBe(false);
    expect(refs.banner.textContent).toMatch(/not saved/);
    expect(refs.banner.querySelector('#retry')).not.toBeNull();
  });
});
