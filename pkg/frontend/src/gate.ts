/** Per-session request serialization: at most one edit in flight. */

export class RequestPending extends Error {
  constructor(readonly sessionId: string) {
    super(`session ${sessionId} already has a request in flight`);
    this.name = "RequestPending";
  }
}

/**
 * Refuses a second submission for a session until the first settles.
 * Refusal (not queueing) keeps the UI honest: the sliders disable while an
 * edit is pending instead of silently batching movements.
 */
export class PendingGate {
  private readonly pending = new Set<string>();

  isPending(sessionId: string): boolean {
    return this.pending.has(sessionId);
  }

  async run<T>(sessionId: string, work: () => Promise<T>): Promise<T> {
    if (this.pending.has(sessionId)) {
      throw new RequestPending(sessionId);
    }
    this.pending.add(sessionId);
    try {
      return await work();
    } finally {
      this.pending.delete(sessionId);
    }
  }
}
