import { ApiClient } from './api';
import { ReviewController } from './controller';
import { attachDragHandlers, findRefs, render } from './render';
import { CATEGORIES } from './types';

function reviewerName(): string {
  const stored = window.localStorage.getItem('reviewer');
  if (stored) return stored;
  const entered = window.prompt('Reviewer name', 'reviewer') || 'reviewer';
  window.localStorage.setItem('reviewer', entered);
  return entered;
}

function bindKeyboard(controller: ReviewController): void {
  window.addEventListener('keydown', (event) => {
    if (event.target instanceof HTMLInputElement) return;
    if (controller.edit) {
      switch (event.key) {
        case 'Escape':
          controller.cancelEdit();
          return;
        case 'Enter':
          void controller.submitEdit();
          return;
        case 'Tab':
          event.preventDefault();
          controller.cycleSpan();
          return;
        case '[':
          controller.moveBoundary('start', -1);
          return;
        case ']':
          controller.moveBoundary('start', 1);
          return;
        case ';':
          controller.moveBoundary('end', -1);
          return;
        case "'":
          controller.moveBoundary('end', 1);
          return;
        case 'd':
          controller.removeActiveSpan();
          return;
        case '1':
        case '2':
        case '3':
        case '4': {
          const label = CATEGORIES[Number(event.key) - 1];
          if (label) controller.setLabel(label);
          return;
        }
        default:
          return;
      }
    }
    switch (event.key) {
      case 'a':
        void controller.accept();
        return;
      case 'r':
        void controller.reject();
        return;
      case 'n':
      case 'ArrowRight':
        controller.next();
        return;
      case 'p':
      case 'ArrowLeft':
        controller.previous();
        return;
      case 'e':
        controller.enterEdit();
        return;
      default:
        return;
    }
  });
}

function bindButtons(controller: ReviewController): void {
  const on = (id: string, handler: () => void): void => {
    document.getElementById(id)?.addEventListener('click', handler);
  };
  on('accept', () => void controller.accept());
  on('reject', () => void controller.reject());
  on('edit', () => controller.enterEdit());
  on('next', () => controller.next());
  on('prev', () => controller.previous());
  on('submit-edit', () => void controller.submitEdit());
  on('cancel-edit', () => controller.cancelEdit());
  on('remove-span', () => controller.removeActiveSpan());
  for (const category of CATEGORIES) {
    on(`label-${category}`, () => controller.setLabel(category));
  }
}

async function boot(): Promise<void> {
  const controller = new ReviewController(new ApiClient(''), {
    reviewer: reviewerName(),
  });
  const refs = findRefs(document);
  controller.onChange(() => render(controller, refs));
  bindKeyboard(controller);
  bindButtons(controller);
  attachDragHandlers(controller, refs);
  await controller.start();
  render(controller, refs);
}

void boot();
