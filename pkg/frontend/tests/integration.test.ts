// Scripted console session against the live service with the stern
// model: create -> read question -> answer tapered=detected -> read
// ranking. Verifies the leading class and that every rendered
// probability equals the API payload bit for bit.

import { spawn, ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import path from 'node:path';
import { fileURLToPath } from 'node:url';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { HelmApi } from '../src/api.js';
import { renderSession } from '../src/render.js';
import { SessionStore } from '../src/state.js';

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), '..', '..');

let server: ChildProcess;

async function waitForService(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/models`);
      if (response.ok) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service did not come up on ${BASE}: ${lastError}`);
}

beforeAll(async () => {
  server = spawn(
    'python3',
    ['-m', 'helm.cli', 'serve', '--port', String(PORT),
     '--models-dir', path.join(REPO_ROOT, 'models'),
     '--sessions-dir', mkdtempSync(path.join(tmpdir(), 'helm-sessions-'))],
    { cwd: REPO_ROOT, stdio: 'ignore' },
  );
  await waitForService(30_000);
}, 40_000);

afterAll(() => {
  server?.kill();
});

describe('live service session', () => {
  it('classifies a tapered stern as Sverdlov with exact displayed numbers',
     async () => {
    const api = new HelmApi(BASE);
    const store = new SessionStore(api);

    const sessionId = await store.create('stern-plan-view', 'bms');
    expect(store.current.view?.status).toBe('active');
    expect(store.current.view?.ranking).toHaveLength(10);

    const question = store.current.question;
    expect(question?.question).toBeTruthy();
    expect(question?.states).toEqual(['detected', 'not-detected']);
    expect(store.questionMerit()).not.toBeNull();

    const ok = await store.submitEvidence(
      'stern-tapered', 'hard', 'detected', 'asked');
    expect(ok).toBe(true);

    const rankingPayload = await api.getRanking(sessionId);
    expect(rankingPayload.ranking[0].class).toBe('sverdlov');
    expect(store.current.view?.ranking[0].class).toBe('sverdlov');

    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById('app')!;
    renderSession(root, store);

    const rows = [...root.querySelectorAll('.ranking-row')];
    expect(rows).toHaveLength(rankingPayload.ranking.length);
    rows.forEach((row, i) => {
      const payload = rankingPayload.ranking[i];
      expect(row.querySelector('.class-name')!.textContent).toBe(payload.class);
      expect(Number(row.querySelector('.probability')!.textContent))
        .toBe(payload.probability);
    });
    expect(rows[0].querySelector('.class-name')!.textContent).toBe('sverdlov');

    const journal = [...root.querySelectorAll('.journal-entry')];
    expect(journal).toHaveLength(1);
    expect(journal[0].textContent).toContain('stern-tapered');
  }, 30_000);

  it('surfaces service rejections inline', async () => {
    const store = new SessionStore(new HelmApi(BASE));
    await store.create('stern-plan-view', 'prospector');
    const ok = await store.submitEvidence('no-such-node', 'hard', 'detected',
                                          'volunteered');
    expect(ok).toBe(false);
    expect(store.current.inlineError).toContain('unknown-node');
  }, 30_000);
});
