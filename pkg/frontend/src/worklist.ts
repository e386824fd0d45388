import type { ActivityDef, ModelDoc, WorkItem } from './api.js'
import { formatStamp } from './format.js'

export interface WorklistRow {
  item: WorkItem
  activity: ActivityDef | null
}

/** Pair each work item with its activity definition so the form knows which
 * inputs and outcomes to offer. Items are rendered exactly as returned, in
 * server order, one row per item. */
export function buildRows(items: WorkItem[], models: Map<string, ModelDoc>): WorklistRow[] {
  return items.map((item) => {
    // instance ids are "{model}-{counter}", the model name may itself
    // contain dashes, so match against known model names
    let activity: ActivityDef | null = null
    for (const doc of models.values()) {
      if (!item.instance.startsWith(doc.name + '-')) continue
      activity = doc.activities.find((a) => a.name === item.activity) ?? null
      break
    }
    return { item, activity }
  })
}

function inputFields(activity: ActivityDef): HTMLElement[] {
  const fields: HTMLElement[] = []
  for (const name of activity.inputs) {
    const label = document.createElement('label')
    label.textContent = name
    const input = document.createElement('input')
    input.name = name
    input.required = true
    label.appendChild(input)
    fields.push(label)
  }
  if (activity.outcome_states) {
    const label = document.createElement('label')
    label.textContent = 'outcome'
    const select = document.createElement('select')
    select.name = 'outcome'
    for (const key of Object.keys(activity.outcome_states)) {
      const opt = document.createElement('option')
      opt.value = key
      opt.textContent = `${key} (${activity.outcome_states[key]})`
      select.appendChild(opt)
    }
    label.appendChild(select)
    fields.push(label)
  }
  return fields
}

export function collectParameters(form: HTMLFormElement): Record<string, unknown> {
  const params: Record<string, unknown> = {}
  const data = new FormData(form)
  data.forEach((value, key) => {
    params[key] = value
  })
  return params
}

export type SubmitHandler = (
  row: WorklistRow,
  parameters: Record<string, unknown>,
) => Promise<void>

export function renderWorklist(
  container: HTMLElement,
  rows: WorklistRow[],
  onSubmit: SubmitHandler,
): void {
  container.replaceChildren()
  if (rows.length === 0) {
    const empty = document.createElement('p')
    empty.className = 'empty'
    empty.textContent = 'No work items for this actor.'
    container.appendChild(empty)
    return
  }
  for (const row of rows) {
    const card = document.createElement('article')
    card.className = 'work-item'
    card.dataset.instance = row.item.instance
    card.dataset.activity = row.item.activity

    const head = document.createElement('header')
    const title = document.createElement('strong')
    title.textContent = row.item.activity
    head.appendChild(title)
    const meta = document.createElement('span')
    meta.className = 'meta'
    meta.textContent = `${row.item.entity} — waiting since ${formatStamp(row.item.enabled_since)}`
    head.appendChild(meta)
    card.appendChild(head)

    const link = document.createElement('a')
    link.href = `#instance/${row.item.instance}`
    link.textContent = row.item.instance
    card.appendChild(link)

    const form = document.createElement('form')
    if (row.activity) {
      for (const field of inputFields(row.activity)) form.appendChild(field)
    }
    const button = document.createElement('button')
    button.type = 'submit'
    button.textContent = 'Perform'
    form.appendChild(button)
    form.addEventListener('submit', (ev) => {
      ev.preventDefault()
      button.disabled = true
      void onSubmit(row, collectParameters(form)).finally(() => {
        button.disabled = false
      })
    })
    card.appendChild(form)
    container.appendChild(card)
  }
}

/** Banner shown when a perform comes back 409: the item went stale under us
 * and the list needs a refresh, nothing was lost. */
export function renderConflictNotice(container: HTMLElement, message: string): void {
  const note = document.createElement('p')
  note.className = 'conflict-notice'
  note.setAttribute('role', 'alert')
  note.textContent = `Work item is out of date (${message}). The list has been refreshed.`
  container.prepend(note)
}
