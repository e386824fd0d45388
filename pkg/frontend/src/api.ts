/** Typed fetch client for the process engine HTTP API.
 *
 * Every number coming off the wire is passed through untouched; formatting
 * decisions live in format.ts so the tests can check them in isolation.
 */

export interface RoleGrant {
  role: string
  expertise: number
}

export interface ActorInfo {
  id: string
  name: string
  roles: RoleGrant[]
}

export interface ActivityDef {
  name: string
  entity_type: string
  transition: [string, string]
  required_role: string
  min_expertise: number
  inputs: string[]
  objective?: string
  outcome_states?: Record<string, string>
}

export interface ModelDoc {
  name: string
  version: number
  typology: Record<string, string>
  activities: ActivityDef[]
  [key: string]: unknown
}

export interface ModelSummary {
  name: string
  version: number
  typology: Record<string, string>
}

export interface WorkItem {
  instance: string
  activity: string
  entity: string
  enabled_since: string
}

export interface EntityView {
  id: string
  type: string
  state: string
  attributes: Record<string, unknown>
  parent: string | null
  entered_state_at: string
}

export interface ObjectiveView {
  objective: string
  reached: boolean
  last_evaluated: string
  history: [string, boolean][]
}

export interface InstanceView {
  id: string
  model: { name: string; version: number }
  status: string
  started_at: string
  ended_at: string | null
  entities: EntityView[]
  objectives: ObjectiveView[]
}

export interface IndicatorValue {
  indicator: string
  as_of: string
  value: number | string | null
  sample_size: number
  family: string
  perspective: string
}

export interface Scorecard {
  as_of: string
  perspectives: Record<string, IndicatorValue[]>
}

export interface DriftEntry {
  instance: string
  dwell_ms: number
}

export interface TraceEvent {
  seq: number
  at: string
  kind: string
  instance: string | null
  entity: string | null
  activity: string | null
  actor: string | null
  from_state: string | null
  to_state: string | null
  payload: Record<string, unknown>
}

export interface ApiError {
  code: string
  message: string
}

/** Thrown for any non-2xx response; carries the server's error code. */
export class RequestFailed extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`)
  }

  /** A 409 means our view of the instance is stale, not that we are broken. */
  get isConflict(): boolean {
    return this.status === 409
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    })
    if (!resp.ok) {
      let body: ApiError
      try {
        body = (await resp.json()) as ApiError
      } catch {
        body = { code: 'Unreadable', message: `HTTP ${resp.status}` }
      }
      throw new RequestFailed(resp.status, body)
    }
    return (await resp.json()) as T
  }

  private get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const qs = params ? '?' + new URLSearchParams(params).toString() : ''
    return this.request<T>(path + qs)
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, { method: 'POST', body: JSON.stringify(body) })
  }

  actors(): Promise<ActorInfo[]> {
    return this.get('/actors')
  }

  models(): Promise<ModelSummary[]> {
    return this.get('/models')
  }

  model(name: string, version: number): Promise<ModelDoc> {
    return this.get(`/models/${encodeURIComponent(name)}/${version}`)
  }

  worklist(actor: string, asOf?: string): Promise<WorkItem[]> {
    const params: Record<string, string> = { actor }
    if (asOf) params.as_of = asOf
    return this.get('/worklist', params)
  }

  instance(id: string): Promise<InstanceView> {
    return this.get(`/instances/${encodeURIComponent(id)}`)
  }

  instances(): Promise<InstanceView[]> {
    return this.get('/instances')
  }

  perform(
    instanceId: string,
    activity: string,
    actor: string,
    at: string,
    parameters: Record<string, unknown>,
  ): Promise<InstanceView> {
    const path =
      `/instances/${encodeURIComponent(instanceId)}` +
      `/activities/${encodeURIComponent(activity)}`
    return this.post(path, { actor, at, parameters })
  }

  attest(objective: string, instanceId: string, actor: string, at: string): Promise<InstanceView> {
    return this.post(`/objectives/${encodeURIComponent(objective)}/attest`, {
      instance: instanceId,
      actor,
      at,
    })
  }

  scorecard(asOf?: string): Promise<Scorecard> {
    return this.get('/scorecard', asOf ? { as_of: asOf } : undefined)
  }

  drift(model: string, state: string, maxDwellMs: number, asOf?: string): Promise<DriftEntry[]> {
    const params: Record<string, string> = {
      model,
      state,
      max_dwell_ms: String(maxDwellMs),
    }
    if (asOf) params.as_of = asOf
    return this.get('/drift', params)
  }

  events(instanceId: string): Promise<TraceEvent[]> {
    return this.get('/events', { instance: instanceId })
  }
}
