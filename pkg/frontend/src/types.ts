// Payload shapes of the review API.

export type Verdict = 'correct' | 'incorrect'
export type ComponentKind = 'entity' | 'entity-type' | 'triplet'

export interface DocumentSummary {
  id: string
  token_count: number
  entities: number
  triplets: number
}

export interface AnnotationRecord {
  target_kind: ComponentKind
  target_id: string
  verdict: Verdict
  type_label?: string
  inferred?: boolean
  assessor?: string
}

export interface EntityComponent {
  id: string
  label: string
  description: string
  types: string[]
  excerpt: string
  annotations: AnnotationRecord[]
  type_annotations: Record<string, AnnotationRecord[]>
}

export interface TripletComponent {
  id: string
  subject: string
  predicate: string
  predicate_description: string
  object: string
  excerpt: string
  annotations: AnnotationRecord[]
}

export interface DocumentComponents {
  document_id: string
  entities: EntityComponent[]
  triplets: TripletComponent[]
  qualifying_types: string[]
}

export interface MetricsPayload {
  counts: {
    entity: { tp: number; fp: number; fn: number }
    entity_type: { tp: number; fp: number }
    triplet: { tp: number; fp: number }
    inferred: { entity: number; triplet: number }
  }
  percentages: Record<string, number>
  pending: Record<ComponentKind, number>
  total_targets: Record<ComponentKind, number>
  completeness_pct: number
  notes: string[]
}

export interface GroundTruthRecord {
  document_id: string
  type_label: string
  labels: string[]
}
