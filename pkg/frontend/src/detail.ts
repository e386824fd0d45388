import type { InstanceView, TraceEvent } from './api.js'
import { formatStamp } from './format.js'

function section(title: string): [HTMLElement, HTMLHeadingElement] {
  const sec = document.createElement('section')
  const h = document.createElement('h3')
  h.textContent = title
  sec.appendChild(h)
  return [sec, h]
}

export function renderInstance(container: HTMLElement, view: InstanceView): void {
  container.replaceChildren()

  const head = document.createElement('header')
  const title = document.createElement('h2')
  title.textContent = view.id
  head.appendChild(title)
  const status = document.createElement('span')
  status.className = `status status-${view.status}`
  status.textContent = view.status
  head.appendChild(status)
  const model = document.createElement('span')
  model.className = 'meta'
  model.textContent = `${view.model.name} v${view.model.version}, started ${formatStamp(view.started_at)}`
  head.appendChild(model)
  container.appendChild(head)

  const [entities] = section('Entities')
  const table = document.createElement('table')
  table.className = 'entities'
  for (const ent of view.entities) {
    const tr = document.createElement('tr')
    tr.dataset.entity = ent.id
    const name = document.createElement('td')
    name.textContent = ent.type
    tr.appendChild(name)
    const state = document.createElement('td')
    state.className = 'state'
    state.textContent = ent.state
    tr.appendChild(state)
    const attrs = document.createElement('td')
    attrs.className = 'attrs'
    attrs.textContent = Object.entries(ent.attributes)
      .map(([k, v]) => `${k}=${String(v)}`)
      .join(', ')
    tr.appendChild(attrs)
    table.appendChild(tr)
  }
  entities.appendChild(table)
  container.appendChild(entities)

  const [objectives] = section('Objectives')
  if (view.objectives.length === 0) {
    const none = document.createElement('p')
    none.className = 'empty'
    none.textContent = 'no objectives evaluated yet'
    objectives.appendChild(none)
  } else {
    const list = document.createElement('ul')
    for (const obj of view.objectives) {
      const li = document.createElement('li')
      li.dataset.objective = obj.objective
      const mark = obj.reached ? 'reached' : 'not reached'
      li.textContent = `${obj.objective}: ${mark} (last evaluated ${formatStamp(obj.last_evaluated)})`
      li.className = obj.reached ? 'objective-reached' : 'objective-open'
      list.appendChild(li)
    }
    objectives.appendChild(list)
  }
  container.appendChild(objectives)
}

function describe(ev: TraceEvent): string {
  switch (ev.kind) {
    case 'instance_started':
      return 'instance started'
    case 'instance_completed':
      return 'instance completed'
    case 'state_changed':
      return `${ev.activity} by ${ev.actor}: ${ev.entity} ${ev.from_state} -> ${ev.to_state}`
    case 'objective_evaluated': {
      const reached = (ev.payload as { reached?: boolean }).reached
      return `objective ${String((ev.payload as { objective?: string }).objective ?? '')} evaluated: ${reached ? 'reached' : 'not reached'}`
    }
    case 'objective_attested':
      return `objective ${String((ev.payload as { objective?: string }).objective ?? '')} attested by ${ev.actor}`
    default:
      return ev.kind
  }
}

export function renderTimeline(container: HTMLElement, events: TraceEvent[]): void {
  const [sec] = section('Timeline')
  const list = document.createElement('ol')
  list.className = 'timeline'
  for (const ev of events) {
    const li = document.createElement('li')
    li.dataset.seq = String(ev.seq)
    const stamp = document.createElement('time')
    stamp.textContent = formatStamp(ev.at)
    li.appendChild(stamp)
    li.appendChild(document.createTextNode(' ' + describe(ev)))
    list.appendChild(li)
  }
  sec.appendChild(list)
  container.appendChild(sec)
}
