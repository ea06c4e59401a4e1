// Chat view state and its pure transitions. The view is a function of the
// session transcript: rebuilding from a fetched transcript reconstructs the
// same conversation, which is what makes page reloads safe.

import { Presumption, ProofNode, SystemAction } from './api.js';

export type Phase = 'composing' | 'awaiting_engine' | 'done_success' | 'done_fail';

export interface Message {
  speaker: 'user' | 'corgi';
  text: string;
}

export interface ChatViewState {
  sessionId: string | null;
  messages: Message[];
  phase: Phase;
  proof: ProofNode | null;
  presumptions: Presumption[];
  notice: string | null;
}

export function initialState(): ChatViewState {
  return {
    sessionId: null,
    messages: [],
    phase: 'composing',
    proof: null,
    presumptions: [],
    notice: null,
  };
}

export function inputEnabled(state: ChatViewState): boolean {
  return state.phase === 'composing';
}

// optimistic append of the user bubble while the request is in flight
export function withUserMessage(state: ChatViewState, text: string): ChatViewState {
  return {
    ...state,
    messages: [...state.messages, { speaker: 'user', text }],
    phase: 'awaiting_engine',
    notice: null,
  };
}

export function applyAction(
  state: ChatViewState,
  sessionId: string,
  action: SystemAction,
): ChatViewState {
  const messages: Message[] = [
    ...state.messages,
    { speaker: 'corgi', text: action.text },
  ];
  if (action.type === 'ask') {
    return { ...state, sessionId, messages, phase: 'composing' };
  }
  if (action.type === 'succeed') {
    return {
      ...state,
      sessionId,
      messages,
      phase: 'done_success',
      proof: action.proof ?? null,
      presumptions: action.presumptions ?? [],
    };
  }
  return { ...state, sessionId, messages, phase: 'done_fail' };
}

export function withNotice(state: ChatViewState, notice: string, phase?: Phase): ChatViewState {
  return { ...state, notice, phase: phase ?? state.phase };
}

// rebuild the conversation from a fetched transcript (page reload, 409 resync)
export function fromTranscript(
  sessionId: string,
  status: string,
  transcript: [string, string][],
): ChatViewState {
  const messages: Message[] = transcript.map(([speaker, text]) => ({
    speaker: speaker === 'corgi' ? 'corgi' : 'user',
    text,
  }));
  const phase: Phase =
    status === 'succeeded' ? 'done_success' :
    status === 'failed' ? 'done_fail' : 'composing';
  return { sessionId, messages, phase, proof: null, presumptions: [], notice: null };
}

export function withProof(
  state: ChatViewState,
  proof: ProofNode,
  presumptions: Presumption[],
): ChatViewState {
  return { ...state, proof, presumptions };
}
