// DOM rendering. Displayed numbers are the exact values the service
// returned (full precision in the text, percentages only in bar
// geometry); nothing is recomputed client-side.

import { ConsoleState, SessionStore } from './state.js';

export function probabilityText(p: number): string {
  return String(p);
}

export function renderSession(root: HTMLElement, store: SessionStore): void {
  const state = store.current;
  root.textContent = '';
  root.appendChild(renderBanner(state, store));
  if (!state.view) {
    const empty = el('p', 'empty-note');
    empty.textContent = state.banner
      ? 'could not reach the service; retry above'
      : 'no session attached';
    root.appendChild(empty);
    return;
  }
  root.appendChild(renderHeader(state));
  root.appendChild(renderQuestion(state, store));
  root.appendChild(renderRanking(state));
  root.appendChild(renderMerits(state));
  root.appendChild(renderJournal(state));
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}

function renderBanner(state: ConsoleState, store: SessionStore): HTMLElement {
  const banner = el('div', 'banner');
  if (!state.banner) {
    banner.hidden = true;
    return banner;
  }
  const text = el('span', 'banner-text');
  text.textContent = `service unreachable: ${state.banner}`;
  const retry = el('button', 'retry');
  retry.textContent = 'retry';
  retry.addEventListener('click', () => void store.refresh());
  banner.append(text, retry);
  return banner;
}

function renderHeader(state: ConsoleState): HTMLElement {
  const view = state.view!;
  const header = el('header', 'session-header');
  const title = el('h1');
  title.textContent = `${view.model} (${view.engine})`;
  const badge = el('span', `status-badge status-${view.status}`);
  badge.textContent = view.reason ? `${view.status} (${view.reason})` : view.status;
  const id = el('code', 'session-id');
  id.textContent = view.id;
  header.append(title, badge, id);
  return header;
}

function renderRanking(state: ConsoleState): HTMLElement {
  const view = state.view!;
  const section = el('section', 'ranking');
  const heading = el('h2');
  heading.textContent = 'class ranking';
  section.appendChild(heading);
  const list = el('ol', 'ranking-rows');
  for (const row of view.ranking) {
    const item = el('li', 'ranking-row');
    item.dataset.class = row.class;

    const delta = state.rankDeltas[row.class] ?? 0;
    const deltaMark = el('span', 'rank-delta');
    deltaMark.textContent = delta > 0 ? `▲${delta}` : delta < 0 ? `▼${-delta}` : '·';

    const name = el('span', 'class-name');
    name.textContent = row.class;

    const bar = el('div', 'bar');
    const fill = el('div', 'bar-fill');
    fill.style.width = `${Math.max(0, Math.min(1, row.probability)) * 100}%`;
    bar.appendChild(fill);

    const prob = el('span', 'probability');
    prob.textContent = probabilityText(row.probability);

    item.append(deltaMark, name, bar, prob);
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

function renderQuestion(state: ConsoleState, store: SessionStore): HTMLElement {
  const section = el('section', 'question-panel');
  const heading = el('h2');
  heading.textContent = 'proposed question';
  section.appendChild(heading);

  const question = state.question;
  if (!question || !question.question) {
    const note = el('p', 'question-none');
    note.textContent =
      state.view!.status === 'active' ? 'no questions left' : 'session stopped';
    section.appendChild(note);
    return section;
  }

  const label = el('p', 'question-label');
  label.textContent = question.label ?? question.question;
  section.appendChild(label);

  const merit = store.questionMerit();
  const meritLine = el('p', 'question-merit');
  meritLine.textContent = merit === null ? 'merit unavailable' : `merit ${probabilityText(merit)}`;
  section.appendChild(meritLine);

  const answers = el('div', 'answers');
  for (const stateName of question.states ?? []) {
    const button = el('button', 'answer');
    button.textContent = stateName;
    button.disabled = state.busy;
    button.addEventListener('click', () =>
      void store.submitEvidence(question.question!, 'hard', stateName, 'asked'),
    );
    answers.appendChild(button);
  }
  section.appendChild(answers);

  // graded slider for uncertain observations, 1% steps
  const graded = el('div', 'graded');
  const slider = el('input', 'graded-slider');
  slider.type = 'range';
  slider.min = '0';
  slider.max = '100';
  slider.step = '1';
  slider.value = '75';
  const sliderValue = el('span', 'graded-value');
  sliderValue.textContent = '75%';
  slider.addEventListener('input', () => {
    sliderValue.textContent = `${slider.value}%`;
  });
  const submit = el('button', 'graded-submit');
  submit.textContent = 'report graded';
  submit.disabled = state.busy;
  submit.addEventListener('click', () =>
    void store.submitEvidence(
      question.question!,
      'graded',
      Number(slider.value) / 100,
      'asked',
    ),
  );
  graded.append(slider, sliderValue, submit);
  section.appendChild(graded);

  const inline = el('p', 'inline-error');
  if (state.inlineError) {
    inline.textContent = state.inlineError;
  } else {
    inline.hidden = true;
  }
  section.appendChild(inline);
  return section;
}

function renderMerits(state: ConsoleState): HTMLElement {
  const section = el('section', 'merit-table');
  const heading = el('h2');
  heading.textContent = 'question merits';
  section.appendChild(heading);
  const table = el('table');
  const head = el('tr');
  for (const column of ['question', 'deltaP', 'cost', 'merit']) {
    const th = el('th');
    th.textContent = column;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of state.merits) {
    const tr = el('tr');
    tr.dataset.question = row.question;
    for (const value of [row.question, probabilityText(row.deltaP),
                         probabilityText(row.cost), probabilityText(row.merit)]) {
      const td = el('td');
      td.textContent = value;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  section.appendChild(table);
  return section;
}

function renderJournal(state: ConsoleState): HTMLElement {
  const view = state.view!;
  const section = el('section', 'journal');
  const heading = el('h2');
  heading.textContent = 'evidence journal';
  section.appendChild(heading);
  const list = el('ol', 'journal-entries');
  for (const entry of view.journal) {
    const item = el('li', 'journal-entry');
    item.textContent =
      `#${entry.seq} ${entry.node} ${entry.form}=${JSON.stringify(entry.value)} ` +
      `(${entry.source})`;
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}
