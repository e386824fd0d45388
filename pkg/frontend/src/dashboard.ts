import type { DriftEntry, Scorecard } from './api.js'
import { flagClass, formatDuration, formatValue, perspectiveTitle } from './format.js'

// panel order is fixed regardless of object key order in the payload
const PERSPECTIVES = ['financial', 'customer', 'internal_process', 'learning']

export function renderScorecard(container: HTMLElement, card: Scorecard): void {
  container.replaceChildren()
  const stamp = document.createElement('p')
  stamp.className = 'as-of'
  stamp.textContent = `as of ${card.as_of}`
  container.appendChild(stamp)

  const grid = document.createElement('div')
  grid.className = 'scorecard-grid'
  for (const key of PERSPECTIVES) {
    const panel = document.createElement('section')
    panel.className = 'perspective'
    panel.dataset.perspective = key
    const h = document.createElement('h3')
    h.textContent = perspectiveTitle(key)
    panel.appendChild(h)

    const values = card.perspectives[key] ?? []
    if (values.length === 0) {
      const none = document.createElement('p')
      none.className = 'empty'
      none.textContent = 'no indicators'
      panel.appendChild(none)
    } else {
      const table = document.createElement('table')
      for (const v of values) {
        const tr = document.createElement('tr')
        const name = document.createElement('td')
        name.textContent = v.indicator
        tr.appendChild(name)
        const cell = document.createElement('td')
        cell.className = `value ${flagClass(v)}`.trim()
        cell.textContent = formatValue(v)
        tr.appendChild(cell)
        const n = document.createElement('td')
        n.className = 'sample'
        n.textContent = v.sample_size > 0 ? `n=${v.sample_size}` : ''
        tr.appendChild(n)
        table.appendChild(tr)
      }
      panel.appendChild(table)
    }
    grid.appendChild(panel)
  }
  container.appendChild(grid)
}

/** Instances sitting too long in one state, worst first, each linked to its
 * detail view. */
export function renderDriftList(container: HTMLElement, entries: DriftEntry[]): void {
  container.replaceChildren()
  const h = document.createElement('h3')
  h.textContent = 'Stuck instances'
  container.appendChild(h)
  if (entries.length === 0) {
    const none = document.createElement('p')
    none.className = 'empty'
    none.textContent = 'none'
    container.appendChild(none)
    return
  }
  const list = document.createElement('ul')
  list.className = 'drift-list'
  for (const entry of entries) {
    const li = document.createElement('li')
    const link = document.createElement('a')
    link.href = `#instance/${entry.instance}`
    link.textContent = entry.instance
    li.appendChild(link)
    li.appendChild(document.createTextNode(` — ${formatDuration(entry.dwell_ms)} in state`))
    list.appendChild(li)
  }
  container.appendChild(list)
}
