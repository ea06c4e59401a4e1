import { describe, expect, it } from 'vitest';

import { SystemAction } from '../src/api.js';
import {
  applyAction,
  fromTranscript,
  initialState,
  inputEnabled,
  withUserMessage,
} from '../src/state.js';

const ask: SystemAction = { type: 'ask', text: "How do I know if ``I remain dry''?" };
const succeed: SystemAction = {
  type: 'succeed',
  text: 'Okay, I will perform ``x`` in order to achieve ``y``.',
  proof: { t: 0, goal: 'remain(i, dry)', clause_id: 20, children: [] },
  presumptions: [],
};
const fail: SystemAction = { type: 'fail', text: 'Sorry.', reason: 'loop_bound' };

describe('chat view state', () => {
  it('starts composing with input enabled', () => {
    const state = initialState();
    expect(state.phase).toBe('composing');
    expect(inputEnabled(state)).toBe(true);
  });

  it('disables input while awaiting the engine', () => {
    const state = withUserMessage(initialState(), 'If a then b because c');
    expect(state.phase).toBe('awaiting_engine');
    expect(inputEnabled(state)).toBe(false);
  });

  it('renders the first question and re-enables input', () => {
    let state = withUserMessage(initialState(), 'command');
    state = applyAction(state, 's1', ask);
    expect(state.phase).toBe('composing');
    expect(state.messages.map((m) => m.speaker)).toEqual(['user', 'corgi']);
    expect(state.messages[1].text).toContain('How do I know');
  });

  it('success carries the proof and locks input', () => {
    let state = withUserMessage(initialState(), 'command');
    state = applyAction(state, 's1', succeed);
    expect(state.phase).toBe('done_success');
    expect(state.proof?.goal).toBe('remain(i, dry)');
    expect(inputEnabled(state)).toBe(false);
  });

  it('failure locks input without a proof', () => {
    let state = withUserMessage(initialState(), 'command');
    state = applyAction(state, 's1', fail);
    expect(state.phase).toBe('done_fail');
    expect(state.proof).toBeNull();
    expect(inputEnabled(state)).toBe(false);
  });

  it('is a pure function of the transcript', () => {
    let live = withUserMessage(initialState(), 'command');
    live = applyAction(live, 's1', ask);
    live = withUserMessage(live, 'If I have my umbrella.');
    live = applyAction(live, 's1', succeed);

    const transcript: [string, string][] = live.messages.map((m) => [m.speaker, m.text]);
    const rebuilt = fromTranscript('s1', 'succeeded', transcript);
    expect(rebuilt.messages).toEqual(live.messages);
    expect(rebuilt.phase).toBe('done_success');
  });
});
