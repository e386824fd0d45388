// Recorded server payloads; regenerate with scripts/record_api_fixtures.py
// from the repository root.
import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

const here = dirname(fileURLToPath(import.meta.url))

export function loadFixture<T>(name: string): T {
  const raw = readFileSync(join(here, 'fixtures', `${name}.json`), 'utf-8')
  return JSON.parse(raw) as T
}
