// Bootstrap: one session per tab, its id carried in the URL query.

import { HelmApi } from './api.js';
import { renderSession } from './render.js';
import { SessionStore } from './state.js';

const DEFAULT_SERVICE = 'http://127.0.0.1:8642';

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('service') ?? DEFAULT_SERVICE;
}

async function bootstrap(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');
  const api = new HelmApi(serviceUrl());
  const store = new SessionStore(api);
  store.subscribe(() => renderSession(root, store));

  const params = new URLSearchParams(window.location.search);
  const existing = params.get('session');
  if (existing) {
    await store.attach(existing);
    return;
  }

  const form = document.getElementById('create-form') as HTMLFormElement | null;
  if (!form) return;
  form.hidden = false;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const model = (form.elements.namedItem('model') as HTMLInputElement).value;
    const engine = (form.elements.namedItem('engine') as HTMLSelectElement).value;
    void store.create(model, engine).then((id) => {
      params.set('session', id);
      window.history.pushState({}, '', `?${params.toString()}`);
      form.hidden = true;
    });
  });
}

void bootstrap();
