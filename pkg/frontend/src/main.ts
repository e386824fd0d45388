import { RequestFailed, type ModelDoc } from './api.js'
import { renderDriftList, renderScorecard } from './dashboard.js'
import { renderInstance, renderTimeline } from './detail.js'
import { Poller, SessionContext } from './state.js'
import {
  buildRows,
  renderConflictNotice,
  renderWorklist,
  type WorklistRow,
} from './worklist.js'

// state considered stuck after a week; matches the default overdue indicator
const DRIFT_STATE = 'UnderAnalysis'
const DRIFT_MAX_DWELL_MS = 7 * 24 * 3600 * 1000

function el(id: string): HTMLElement {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing #${id}`)
  return node
}

class App {
  private readonly ctx: SessionContext
  private readonly models = new Map<string, ModelDoc>()
  private readonly poller: Poller

  constructor(baseUrl: string, intervalMs: number) {
    this.ctx = new SessionContext(baseUrl)
    this.poller = new Poller(() => this.refresh(), intervalMs)
  }

  async start(): Promise<void> {
    await this.ctx.loadActors()
    for (const summary of await this.ctx.client.models()) {
      const doc = await this.ctx.client.model(summary.name, summary.version)
      this.models.set(`${doc.name}@${doc.version}`, doc)
    }
    this.renderActorPicker()
    window.addEventListener('hashchange', () => void this.refresh())
    await this.refresh()
    this.poller.start()
  }

  private renderActorPicker(): void {
    const select = el('actor-picker') as HTMLSelectElement
    select.replaceChildren()
    for (const actor of this.ctx.actors) {
      const opt = document.createElement('option')
      opt.value = actor.id
      opt.textContent = `${actor.name} (${actor.roles
        .map((r) => `${r.role} ${r.expertise}`)
        .join(', ')})`
      select.appendChild(opt)
    }
    if (this.ctx.actorId) select.value = this.ctx.actorId
    select.addEventListener('change', () => {
      this.ctx.actorId = select.value
      void this.refresh()
    })
  }

  private async refresh(): Promise<void> {
    await Promise.all([this.refreshWorklist(), this.refreshDashboard(), this.refreshDetail()])
  }

  private async refreshWorklist(): Promise<void> {
    const container = el('worklist')
    if (!this.ctx.actorId) {
      container.replaceChildren()
      return
    }
    const items = await this.ctx.client.worklist(this.ctx.actorId, this.ctx.asOf ?? undefined)
    const rows = buildRows(items, this.models)
    renderWorklist(container, rows, (row, parameters) => this.perform(row, parameters))
  }

  private async perform(row: WorklistRow, parameters: Record<string, unknown>): Promise<void> {
    if (!this.ctx.actorId) return
    try {
      await this.ctx.client.perform(
        row.item.instance,
        row.item.activity,
        this.ctx.actorId,
        this.ctx.stampNow(),
        parameters,
      )
    } catch (err) {
      if (err instanceof RequestFailed && err.isConflict) {
        await this.refreshWorklist()
        renderConflictNotice(el('worklist'), err.body.message)
        return
      }
      throw err
    }
    await this.refresh()
  }

  private async refreshDashboard(): Promise<void> {
    const card = await this.ctx.client.scorecard(this.ctx.asOf ?? undefined)
    renderScorecard(el('scorecard'), card)
    const driftByModel = await Promise.all(
      [...this.models.values()].map((doc) =>
        this.ctx.client.drift(doc.name, DRIFT_STATE, DRIFT_MAX_DWELL_MS, this.ctx.asOf ?? undefined),
      ),
    )
    renderDriftList(el('drift'), driftByModel.flat())
  }

  private async refreshDetail(): Promise<void> {
    const container = el('detail')
    const match = /^#instance\/(.+)$/.exec(window.location.hash)
    if (!match) {
      container.replaceChildren()
      return
    }
    const id = decodeURIComponent(match[1])
    const [view, events] = await Promise.all([
      this.ctx.client.instance(id),
      this.ctx.client.events(id),
    ])
    renderInstance(container, view)
    renderTimeline(container, events)
  }
}

const params = new URLSearchParams(window.location.search)
const base = params.get('api') ?? 'http://localhost:8000'
const interval = Number(params.get('poll') ?? '5000')
void new App(base, interval).start()
