// Typed client for the helm session service. The console never computes
// probabilities; everything it shows comes back from these calls.

export interface RankingRow {
  class: string;
  probability: number;
}

export interface QuestionView {
  question: string | null;
  label?: string;
  states?: string[];
  merit?: number;
  deltaP?: number;
  cost?: number;
}

export interface MeritRow {
  question: string;
  deltaP: number;
  cost: number;
  merit: number;
}

export interface JournalEntry {
  seq: number;
  node: string;
  form: string;
  value: unknown;
  source: string;
}

export interface SessionView {
  id: string;
  model: string;
  engine: string;
  status: string;
  reason: string | null;
  ranking: RankingRow[];
  journal: JournalEntry[];
  answered: string[];
  askables: string[];
}

export interface EvidenceBody {
  node: string;
  form: string;
  value: unknown;
  source: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HelmApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = 'http-error';
      let message = `${response.status} on ${path}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        if (body.code) code = body.code;
        if (body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  async listModels(): Promise<string[]> {
    const body = await this.request<{ models: string[] }>('/models');
    return body.models;
  }

  createSession(model: string, engine: string): Promise<{ id: string; status: string }> {
    return this.post('/sessions', { model, engine });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  getQuestion(id: string): Promise<QuestionView> {
    return this.request(`/sessions/${id}/question`);
  }

  async getRanking(id: string): Promise<{ ranking: RankingRow[]; status: string }> {
    return this.request(`/sessions/${id}/ranking`);
  }

  async getMerits(id: string): Promise<MeritRow[]> {
    const body = await this.request<{ merits: MeritRow[] }>(`/sessions/${id}/merits`);
    return body.merits;
  }

  postEvidence(
    id: string,
    body: EvidenceBody,
  ): Promise<{ status: string; ranking: RankingRow[] }> {
    return this.post(`/sessions/${id}/evidence`, body);
  }

  stopSession(
    id: string,
    options: { threshold?: number; force?: boolean } = {},
  ): Promise<{ status: string; reason: string | null }> {
    return this.post(`/sessions/${id}/stop`, options);
  }
}
