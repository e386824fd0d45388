import { ApiClient, type ActorInfo } from './api.js'

/** Session-wide choices the panels share: which server, who is acting,
 * and an optional frozen observation time for the dashboard. */
export class SessionContext {
  readonly client: ApiClient
  actors: ActorInfo[] = []
  actorId: string | null = null
  asOf: string | null = null

  constructor(baseUrl: string) {
    this.client = new ApiClient(baseUrl)
  }

  async loadActors(): Promise<void> {
    this.actors = await this.client.actors()
    if (this.actorId === null && this.actors.length > 0) {
      this.actorId = this.actors[0].id
    }
  }

  get actor(): ActorInfo | null {
    return this.actors.find((a) => a.id === this.actorId) ?? null
  }

  /** Timestamp to submit with write operations: now, in wire format
   * (toISOString already emits millisecond precision with a Z suffix). */
  stampNow(): string {
    return new Date().toISOString()
  }
}

/** Calls refresh on an interval until stopped; a failed refresh does not
 * cancel the loop, the next tick simply tries again. */
export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null

  constructor(
    private readonly refresh: () => Promise<void>,
    private readonly intervalMs: number = 5000,
  ) {}

  start(): void {
    if (this.timer !== null) return
    this.timer = setInterval(() => {
      void this.refresh().catch(() => undefined)
    }, this.intervalMs)
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer)
      this.timer = null
    }
  }
}
