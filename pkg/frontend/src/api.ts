// Typed client for the session API (versioned under /api/v1).

export interface SystemAction {
  type: 'ask' | 'succeed' | 'fail';
  text: string;
  reason?: string;
  proof?: ProofNode;
  presumptions?: Presumption[];
}

export interface ProofNode {
  t: number;
  goal: string;
  clause_id: number | null;
  children: ProofNode[];
}

export interface Presumption {
  node_t: number;
  form: string;
  kind: 'state_constraint' | 'user_fact';
  rendered: string;
}

export interface SessionResponse {
  session_id: string;
  status: string;
  action: SystemAction;
}

export interface TranscriptResponse {
  session_id: string;
  status: string;
  transcript: [string, string][];
  learned_rules: string[];
}

export interface ProofResponse {
  session_id: string;
  proof: ProofNode;
  presumptions: Presumption[];
}

export class ApiError extends Error {
  constructor(public status: number, public body: unknown) {
    super(`API error ${status}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  const body = resp.status === 204 ? null : await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body);
  }
  return body as T;
}

export class SessionApi {
  constructor(private base: string) {}

  createSession(command: string): Promise<SessionResponse> {
    return request<SessionResponse>(this.base, '/api/v1/sessions', {
      method: 'POST',
      body: JSON.stringify({ command }),
    });
  }

  sendAnswer(sessionId: string, text: string): Promise<SessionResponse> {
    return request<SessionResponse>(this.base, `/api/v1/sessions/${sessionId}/answers`, {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }

  getSession(sessionId: string): Promise<TranscriptResponse> {
    return request<TranscriptResponse>(this.base, `/api/v1/sessions/${sessionId}`);
  }

  getProof(sessionId: string): Promise<ProofResponse> {
    return request<ProofResponse>(this.base, `/api/v1/sessions/${sessionId}/proof`);
  }
}
