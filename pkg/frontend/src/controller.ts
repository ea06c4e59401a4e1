// Glue between the API client and the view state. One in-flight request at
// a time; a 409 re-syncs the view from the server's transcript.

import { ApiError, SessionApi, SystemAction } from './api.js';
import {
  ChatViewState,
  applyAction,
  fromTranscript,
  initialState,
  inputEnabled,
  withNotice,
  withProof,
  withUserMessage,
} from './state.js';

export class ChatController {
  state: ChatViewState = initialState();
  actions: SystemAction[] = [];

  constructor(private api: SessionApi) {}

  async startDialog(command: string): Promise<ChatViewState> {
    if (!command.trim()) {
      this.state = withNotice(this.state, 'Type an if-then-because command first.');
      return this.state;
    }
    this.state = withUserMessage(initialState(), command);
    try {
      const resp = await this.api.createSession(command);
      this.actions = [resp.action];
      this.state = applyAction(this.state, resp.session_id, resp.action);
      if (this.state.phase === 'done_success') {
        await this.loadProof();
      }
    } catch (err) {
      this.state = this.describeError(err);
    }
    return this.state;
  }

  async sendAnswer(text: string): Promise<ChatViewState> {
    const sessionId = this.state.sessionId;
    if (!inputEnabled(this.state) || sessionId === null) {
      return this.state; // input disabled: no request goes out
    }
    this.state = withUserMessage(this.state, text);
    try {
      const resp = await this.api.sendAnswer(sessionId, text);
      this.actions.push(resp.action);
      this.state = applyAction(this.state, sessionId, resp.action);
      if (this.state.phase === 'done_success') {
        await this.loadProof();
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && this.state.sessionId) {
        await this.resync('The session moved on; re-synced from the server.');
      } else {
        this.state = this.describeError(err);
      }
    }
    return this.state;
  }

  async resync(notice: string): Promise<void> {
    if (this.state.sessionId === null) return;
    const session = await this.api.getSession(this.state.sessionId);
    this.state = withNotice(
      fromTranscript(session.session_id, session.status, session.transcript),
      notice,
    );
    if (session.status === 'succeeded') {
      await this.loadProof();
    }
  }

  private async loadProof(): Promise<void> {
    if (this.state.sessionId === null) return;
    try {
      const resp = await this.api.getProof(this.state.sessionId);
      this.state = withProof(this.state, resp.proof, resp.presumptions);
    } catch {
      // malformed or missing proof: the view falls back to the raw record panel
    }
  }

  private describeError(err: unknown): ChatViewState {
    if (err instanceof ApiError && err.status === 400) {
      const body = err.body as { error?: string; clarification?: string };
      const text = body?.clarification ?? body?.error ?? 'Bad request.';
      return withNotice({ ...this.state, phase: 'composing' }, text);
    }
    const message = err instanceof Error ? err.message : String(err);
    // network failures keep the state so the user can retry
    return withNotice({ ...this.state, phase: 'composing' }, `Request failed: ${message}`);
  }
}
