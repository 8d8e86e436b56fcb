// Session view-model. Every mutation posts to the service and then
// refetches; the view always reflects confirmed server state, never an
// optimistic guess. Fetch failures raise a retry banner but keep the
// last good view on screen; 4xx rejections surface inline next to the
// control that caused them.

import { ApiError, HelmApi, MeritRow, QuestionView, SessionView } from './api.js';

export interface ConsoleState {
  sessionId: string | null;
  view: SessionView | null;
  question: QuestionView | null;
  merits: MeritRow[];
  rankDeltas: Record<string, number>;
  banner: string | null;
  inlineError: string | null;
  busy: boolean;
}

type Listener = (state: ConsoleState) => void;

export class SessionStore {
  private state: ConsoleState = {
    sessionId: null,
    view: null,
    question: null,
    merits: [],
    rankDeltas: {},
    banner: null,
    inlineError: null,
    busy: false,
  };

  private listeners: Listener[] = [];

  constructor(private readonly api: HelmApi) {}

  get current(): ConsoleState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  async create(model: string, engine: string): Promise<string> {
    const created = await this.api.createSession(model, engine);
    await this.attach(created.id);
    return created.id;
  }

  async attach(sessionId: string): Promise<void> {
    this.update({ sessionId, rankDeltas: {} });
    await this.refresh();
  }

  /** Pull view, proposed question, and merit table from the server.
   *  Rank deltas compare against the previously displayed ranking. */
  async refresh(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const previous = this.state.view?.ranking ?? [];
    try {
      const view = await this.api.getSession(sessionId);
      const question = await this.api.getQuestion(sessionId);
      const merits = view.status === 'active' ? await this.api.getMerits(sessionId) : [];
      const prevRank = new Map(previous.map((row, i) => [row.class, i]));
      const rankDeltas: Record<string, number> = {};
      view.ranking.forEach((row, i) => {
        const before = prevRank.get(row.class);
        rankDeltas[row.class] = before === undefined ? 0 : before - i;
      });
      this.update({ view, question, merits, rankDeltas, banner: null });
    } catch (error) {
      this.update({ banner: describe(error) });
    }
  }

  /** The merit shown in the question panel comes from the merit table
   *  entry for the proposed question. */
  questionMerit(): number | null {
    const question = this.state.question?.question;
    if (!question) return null;
    const row = this.state.merits.find((m) => m.question === question);
    return row ? row.merit : null;
  }

  async submitEvidence(
    node: string,
    form: string,
    value: unknown,
    source: 'asked' | 'volunteered',
  ): Promise<boolean> {
    const sessionId = this.state.sessionId;
    if (!sessionId || this.state.busy) return false;
    this.update({ busy: true, inlineError: null });
    try {
      await this.api.postEvidence(sessionId, { node, form, value, source });
    } catch (error) {
      if (error instanceof ApiError && error.status < 500) {
        this.update({ busy: false, inlineError: `${error.code}: ${error.message}` });
      } else {
        this.update({ busy: false, banner: describe(error) });
      }
      return false;
    }
    await this.refresh();
    this.update({ busy: false });
    return true;
  }

  async stop(force = false): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      await this.api.stopSession(sessionId, { force });
    } catch (error) {
      this.update({ banner: describe(error) });
      return;
    }
    await this.refresh();
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}
