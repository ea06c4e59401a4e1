// DOM wiring for the chat page. All rendering reads from the controller's
// state; no DOM state of its own beyond the collapse set.

import { SessionApi } from './api.js';
import { ChatController } from './controller.js';
import { flattenProof, visibleRows } from './tree.js';
import { inputEnabled } from './state.js';

const api = new SessionApi('');
const controller = new ChatController(api);
const collapsed = new Set<number>();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(): void {
  const state = controller.state;
  const log = el<HTMLDivElement>('messages');
  log.innerHTML = '';
  for (const message of state.messages) {
    const bubble = document.createElement('div');
    bubble.className = `bubble ${message.speaker}`;
    bubble.textContent = message.text;
    log.appendChild(bubble);
  }
  log.scrollTop = log.scrollHeight;

  const notice = el<HTMLDivElement>('notice');
  notice.textContent = state.notice ?? '';
  notice.hidden = state.notice === null;

  const input = el<HTMLInputElement>('input');
  const send = el<HTMLButtonElement>('send');
  input.disabled = !inputEnabled(state);
  send.disabled = !inputEnabled(state);
  input.placeholder = state.sessionId === null
    ? 'If <state> then <action> because <goal>…'
    : 'Answer like: If <something> happens.';

  renderProof();
}

function renderProof(): void {
  const state = controller.state;
  const panel = el<HTMLDivElement>('proof-panel');
  panel.hidden = state.phase !== 'done_success';
  if (panel.hidden) return;

  const treeBox = el<HTMLDivElement>('proof-tree');
  treeBox.innerHTML = '';
  if (state.proof === null) {
    // fallback: show whatever we have, raw
    treeBox.textContent = JSON.stringify(state, null, 2);
    return;
  }
  const rows = flattenProof(state.proof, state.presumptions);
  for (const row of visibleRows(rows, collapsed)) {
    const line = document.createElement('div');
    line.className = 'proof-row' + (row.highlighted ? ` highlight ${row.kind}` : '');
    line.style.paddingLeft = `${row.depth * 1.25}rem`;
    const toggle = row.hasChildren ? (collapsed.has(row.t) ? '▸ ' : '▾ ') : '· ';
    line.textContent = `${toggle}t=${row.t}  ${row.goal}`;
    if (row.hasChildren) {
      line.addEventListener('click', () => {
        if (collapsed.has(row.t)) collapsed.delete(row.t);
        else collapsed.add(row.t);
        renderProof();
      });
    }
    treeBox.appendChild(line);
  }

  const list = el<HTMLUListElement>('presumptions');
  list.innerHTML = '';
  for (const p of controller.state.presumptions) {
    const item = document.createElement('li');
    item.className = p.kind;
    item.textContent = p.kind === 'state_constraint'
      ? `presumes the state satisfies: ${p.rendered}`
      : `presumes: ${p.rendered}`;
    list.appendChild(item);
  }
}

async function submit(): Promise<void> {
  const input = el<HTMLInputElement>('input');
  const text = input.value.trim();
  if (!text) return;
  input.value = '';
  collapsed.clear();
  if (controller.state.sessionId === null ||
      controller.state.phase === 'done_success' ||
      controller.state.phase === 'done_fail') {
    await controller.startDialog(text);
  } else {
    await controller.sendAnswer(text);
  }
  render();
}

export function boot(): void {
  el<HTMLButtonElement>('send').addEventListener('click', () => void submit());
  el<HTMLInputElement>('input').addEventListener('keydown', (ev) => {
    if (ev.key === 'Enter') void submit();
  });
  el<HTMLButtonElement>('reset').addEventListener('click', () => {
    window.location.reload();
  });
  render();
}

if (typeof document !== 'undefined') {
  boot();
}
