import type { MeritRow, QuestionView, SessionView } from '../src/api.js';

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export interface RouteTable {
  [path: string]: (init?: RequestInit) => Response | Promise<Response>;
}

/** fetch stub keyed by "METHOD path"; records every call it serves. */
export function routedFetch(routes: RouteTable) {
  const calls: { key: string; body?: unknown }[] = [];
  const fn = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, 'http://service.test');
    const key = `${init?.method ?? 'GET'} ${url.pathname}`;
    calls.push({
      key,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    const handler = routes[key];
    if (!handler) {
      return jsonResponse({ code: 'unknown-route', message: key }, 404);
    }
    return handler(init);
  };
  return { fn, calls };
}

export const sampleView: SessionView = {
  id: 'abc123',
  model: 'stern-plan-view',
  engine: 'bms',
  status: 'active',
  reason: null,
  ranking: [
    { class: 'sverdlov', probability: 0.9999999989999999 },
    { class: 'virginia', probability: 1.000000001e-9 },
  ],
  journal: [
    { seq: 1, node: 'stern-tapered', form: 'hard', value: 'detected', source: 'asked' },
  ],
  answered: ['stern-tapered'],
  askables: ['stern-square', 'stern-round', 'stern-tapered'],
};

export const sampleQuestion: QuestionView = {
  question: 'stern-square',
  label: 'Stern appears square',
  states: ['detected', 'not-detected'],
  merit: 0.012345678901234567,
  deltaP: 0.012345678901234567,
  cost: 1.0,
};

export const sampleMerits: MeritRow[] = [
  {
    question: 'stern-square',
    deltaP: 0.012345678901234567,
    cost: 1.0,
    merit: 0.012345678901234567,
  },
  { question: 'stern-round', deltaP: 0.003, cost: 2.0, merit: 0.0015 },
];
