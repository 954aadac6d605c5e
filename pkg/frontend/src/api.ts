// Typed client for the fundlift scoring service. Every number the UI shows
// originates from one of these responses; the client does no inference.

export interface DraftConfig {
  goal_amount: number;
  organizer_male: boolean;
  has_beneficiary: boolean;
  city: string;
  state: string;
  created_date?: string;
}

export interface Checklist {
  gratitude_expressed: boolean;
  urgency_explained: boolean;
  match_grant_mentioned: boolean;
}

export interface Contribution {
  feature: string;
  gain_share: number;
}

export interface Diagnosis {
  predicted_probability: number;
  checklist: Checklist;
  top_feature_contributions: Contribution[];
  lexical: {
    word_count: number;
    fk_grade: number;
    contains_spam: boolean;
  };
}

export interface AugmentResponse {
  augmented_text: string;
  before: Diagnosis;
  after: Diagnosis;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  detail?: unknown;
}

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly envelope: ErrorEnvelope
  ) {
    super(`${envelope.code}: ${envelope.message}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(resp.status, payload as ErrorEnvelope);
    }
    return payload as T;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(resp.status, payload as ErrorEnvelope);
    }
    return payload as T;
  }

  score(text: string, config: DraftConfig): Promise<Diagnosis> {
    return this.post<Diagnosis>('/score', { description: text, ...config });
  }

  augment(text: string, config: DraftConfig): Promise<AugmentResponse> {
    return this.post<AugmentResponse>('/augment', { description: text, ...config });
  }

  modelInfo(): Promise<{ feature_count: number; group_importance: Record<string, number> }> {
    return this.get('/model/info');
  }

  healthz(): Promise<{ status: string; model_loaded: boolean }> {
    return this.get('/healthz');
  }
}
