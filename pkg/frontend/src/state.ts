// Review session state: the judgeable queue for one document, verdict
// submission with its invariants, an offline outbox, and the server-computed
// metrics. No metric arithmetic happens here; every number shown comes from
// GET /api/metrics.

import { ApiClient } from './api.js'
import type {
  AnnotationRecord,
  ComponentKind,
  DocumentComponents,
  MetricsPayload,
  Verdict,
} from './types.js'

export type VerdictState = 'pending' | Verdict

export interface QueueItem {
  kind: ComponentKind
  targetId: string
  typeLabel?: string
  title: string
  detail: string
  excerpt: string
  missingDescription?: boolean
  verdictState: VerdictState
  inferred: boolean | null
}

function latestVerdict(records: AnnotationRecord[]): {
  state: VerdictState
  inferred: boolean | null
} {
  if (records.length === 0) return { state: 'pending', inferred: null }
  const last = records[records.length - 1]
  return { state: last.verdict, inferred: last.inferred ?? null }
}

export function buildQueue(components: DocumentComponents): QueueItem[] {
  const items: QueueItem[] = []
  for (const entity of components.entities) {
    const seed = latestVerdict(entity.annotations)
    items.push({
      kind: 'entity',
      targetId: entity.id,
      title: entity.label,
      detail: entity.description,
      excerpt: entity.excerpt,
      verdictState: seed.state,
      inferred: seed.inferred,
    })
    for (const typeLabel of entity.types) {
      const chipSeed = latestVerdict(entity.type_annotations[typeLabel] ?? [])
      items.push({
        kind: 'entity-type',
        targetId: entity.id,
        typeLabel,
        title: `${entity.label} : ${typeLabel}`,
        detail: `type assignment for ${entity.label}`,
        excerpt: entity.excerpt,
        verdictState: chipSeed.state,
        inferred: null,
      })
    }
  }
  for (const triplet of components.triplets) {
    const seed = latestVerdict(triplet.annotations)
    items.push({
      kind: 'triplet',
      targetId: triplet.id,
      title: `${triplet.subject}; ${triplet.predicate}; ${triplet.object}`,
      detail: triplet.predicate_description || '(predicate description missing)',
      excerpt: triplet.excerpt,
      missingDescription: !triplet.predicate_description,
      verdictState: seed.state,
      inferred: seed.inferred,
    })
  }
  return items
}

interface OutboxEntry {
  record: AnnotationRecord
}

export class ReviewStore {
  items: QueueItem[] = []
  qualifyingTypes: string[] = []
  documentId = ''
  metrics: MetricsPayload | null = null
  online = true
  outbox: OutboxEntry[] = []

  constructor(
    private readonly api: ApiClient,
    readonly assessor: string,
  ) {}

  async loadDocument(documentId: string): Promise<void> {
    const components = await this.api.components(documentId)
    this.documentId = documentId
    this.items = buildQueue(components)
    this.qualifyingTypes = components.qualifying_types
  }

  async refreshMetrics(): Promise<void> {
    this.metrics = await this.api.metrics()
  }

  /** Server pending counts drive the completeness indicator verbatim. */
  pendingCounts(): Record<string, number> {
    return this.metrics ? { ...this.metrics.pending } : {}
  }

  pendingItems(): QueueItem[] {
    return this.items.filter((item) => item.verdictState === 'pending')
  }

  /** The inferred toggle exists only for correct entity/triplet verdicts. */
  canMarkInferred(item: QueueItem, verdict: Verdict): boolean {
    return verdict === 'correct' && item.kind !== 'entity-type'
  }

  async submitVerdict(item: QueueItem, verdict: Verdict, inferred?: boolean): Promise<void> {
    if (inferred !== undefined && !this.canMarkInferred(item, verdict)) {
      throw new Error('the inferred flag applies only to correct entity or triplet verdicts')
    }
    const record: AnnotationRecord = {
      target_kind: item.kind,
      target_id: item.targetId,
      verdict,
      assessor: this.assessor,
    }
    if (item.typeLabel !== undefined) record.type_label = item.typeLabel
    if (inferred !== undefined) record.inferred = inferred

    // optimistic local state; the server copy is authoritative on reload
    item.verdictState = verdict
    item.inferred = inferred ?? null
    try {
      await this.api.submitAnnotation(record)
      this.online = true
    } catch (error) {
      if (isTransport(error)) {
        this.online = false
        this.outbox.push({ record })
        return
      }
      item.verdictState = 'pending'
      item.inferred = null
      throw error
    }
    await this.refreshMetrics()
  }

  async submitMissedEntities(typeLabel: string, labels: string[]): Promise<void> {
    if (!this.qualifyingTypes.includes(typeLabel)) {
      throw new Error(`type ${typeLabel} is not in the qualifying list`)
    }
    await this.api.submitGroundTruth({
      document_id: this.documentId,
      type_label: typeLabel,
      labels,
    })
    await this.refreshMetrics()
  }

  /** Flush queued writes after a reconnect; the server state wins afterwards. */
  async flushOutbox(): Promise<void> {
    const queued = this.outbox
    this.outbox = []
    for (const entry of queued) {
      await this.api.submitAnnotation(entry.record)
    }
    this.online = true
    if (this.documentId) {
      await this.loadDocument(this.documentId)
    }
    await this.refreshMetrics()
  }
}

function isTransport(error: unknown): boolean {
  // ApiError carries a status; anything else is a network-level failure
  return !(error instanceof Error && 'status' in error)
}
