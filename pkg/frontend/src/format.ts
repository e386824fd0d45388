import type { IndicatorValue } from './api.js'

/** Display text for an indicator value.
 *
 * A sample size of zero means the measurement has no basis yet, so the cell
 * shows "n/a" rather than a misleading zero. Flags and comments pass through
 * as text; ratios get three decimals, durations a humane unit.
 */
export function formatValue(v: IndicatorValue): string {
  if (v.sample_size === 0 || v.value === null) return 'n/a'
  if (typeof v.value === 'string') return v.value
  if (Number.isInteger(v.value)) return String(v.value)
  return v.value.toFixed(3)
}

const FLAG_CLASS: Record<string, string> = {
  green: 'flag-green',
  amber: 'flag-amber',
  red: 'flag-red',
}

/** CSS class for a status flag value, empty for non-flag indicators. */
export function flagClass(v: IndicatorValue): string {
  if (typeof v.value !== 'string') return ''
  return FLAG_CLASS[v.value] ?? ''
}

export function formatDuration(ms: number): string {
  if (ms < 1000) return `${ms}ms`
  const s = Math.round(ms / 1000)
  if (s < 120) return `${s}s`
  const m = Math.round(s / 60)
  if (m < 120) return `${m}min`
  const h = Math.round(m / 60)
  if (h < 48) return `${h}h`
  return `${(h / 24).toFixed(1)}d`
}

/** Timestamps arrive as RFC 3339 with millisecond precision; keep them
 * verbatim but drop the fractional part for table cells. */
export function formatStamp(iso: string): string {
  return iso.replace(/\.\d{3}Z$/, 'Z').replace('T', ' ')
}

export function perspectiveTitle(key: string): string {
  return key
    .split('_')
    .map((w) => w.charAt(0).toUpperCase() + w.slice(1))
    .join(' ')
}
