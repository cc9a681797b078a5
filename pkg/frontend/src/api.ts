import type { DecisionWire, ItemsPage, Progress, ReviewItemWire } from './types';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null, // null = network failure
  ) {
    super(message);
  }

  get retriable(): boolean {
    return this.status === null || this.status >= 500;
  }
}

export interface DecisionResponse {
  recorded: boolean;
  superseded: boolean;
  decided: number;
  total: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch {
      throw new ApiError('network failure', null);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON body; fall through with null
    }
    // 409 = decision recorded but superseding an earlier one; not an error
    if (!response.ok && response.status !== 409) {
      const message =
        body && typeof body === 'object' && 'error' in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(message, response.status);
    }
    return body as T;
  }

  pendingItems(offset = 0, limit = 20): Promise<ItemsPage> {
    return this.request(`/api/items?status=pending&offset=${offset}&limit=${limit}`);
  }

  item(id: string): Promise<ReviewItemWire> {
    return this.request(`/api/items/${encodeURIComponent(id)}`);
  }

  decide(id: string, decision: DecisionWire): Promise<DecisionResponse> {
    return this.request(`/api/items/${encodeURIComponent(id)}/decision`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(decision),
    });
  }

  progress(): Promise<Progress> {
    return this.request('/api/progress');
  }

  exportUrl(): string {
    return `${this.base}/api/export`;
  }
}
