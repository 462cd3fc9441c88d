/** Render gate: at most one request in flight, rapid updates coalesce.
 *
 * Each view owns one gate.  `schedule` records the latest desired work; if
 * nothing is running it starts immediately, otherwise it waits and only the
 * most recent schedule survives.  A burst of slider events during one
 * in-flight render therefore costs at most one trailing request.
 */

export type Job = () => Promise<void>;

export class RenderGate {
  private inFlight = false;
  private pending: Job | null = null;

  /** Requests issued through this gate, for tests and debugging. */
  started = 0;

  schedule(job: Job): void {
    if (this.inFlight) {
      this.pending = job;
      return;
    }
    void this.run(job);
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private async run(job: Job): Promise<void> {
    this.inFlight = true;
    this.started += 1;
    try {
      await job();
    } finally {
      this.inFlight = false;
      const next = this.pending;
      this.pending = null;
      if (next) void this.run(next);
    }
  }
}
