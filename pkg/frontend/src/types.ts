/** Wire types mirroring the docpile server's JSON payloads (camelCase). */

export interface DocumentMeta {
  id: string;
  title: string;
  length: number;
  date?: string;
  topic?: string;
}

export interface DocumentFull extends DocumentMeta {
  text: string;
}

export interface DocumentGroup {
  label: string;
  docIds: string[];
}

export interface DocumentsPayload {
  schemaVersion: number;
  documents: DocumentMeta[];
  groups?: DocumentGroup[];
}

export interface DocumentPayload {
  schemaVersion: number;
  document: DocumentFull;
}

export interface SearchResult {
  docId: string;
  score: number;
  rank: number;
}

export interface SearchPayload {
  schemaVersion: number;
  results: SearchResult[];
}

export interface FactRecord {
  id: string;
  subject: string;
  predicate: string;
  object: string;
  sources: string[];
  support: number;
}

export interface RankedFact extends FactRecord {
  score: number;
  rank: number;
}

export interface EntityFactsPayload {
  schemaVersion: number;
  facts: RankedFact[];
}

export interface ConnectedEntity {
  entity: string;
  degree: number;
}

export interface SimilarEntity {
  entity: string;
  score: number;
}

export interface EntityContextPayload {
  schemaVersion: number;
  entity: string;
  connected: ConnectedEntity[];
  similar: SimilarEntity[];
}

export interface FactSourcesPayload {
  schemaVersion: number;
  documents: DocumentFull[];
}

export interface TaskParamsRecord {
  temperature?: number;
  model?: string;
  question?: string;
  entityTypes?: string[];
  concepts?: string[];
  customText?: string;
}

export interface EntitySpan {
  start: number;
  end: number;
  entity: string;
}

export interface SentenceLink {
  responseSentenceIndex: number;
  docId: string;
  docSentenceIndex: number;
  score: number;
}

export interface Suggestion {
  docId: string;
  score: number;
  alreadyInPile: boolean;
  added: boolean;
}

export interface EvidenceAnnotations {
  entitySpans?: EntitySpan[];
  sentenceLinks?: SentenceLink[];
  suggestions?: Suggestion[];
}

export interface EvidenceRecord {
  id: string;
  taskKind: string;
  params: TaskParamsRecord;
  prompt: string;
  response: string;
  createdAt: string;
  docIds: string[];
  annotations: EvidenceAnnotations;
}

export interface PileRecord {
  id: string;
  name: string;
  position: number;
  docIds: string[];
  evidence: EvidenceRecord[];
}

export interface PilePayload {
  schemaVersion: number;
  pile: PileRecord;
}

export interface WorkspaceRecord {
  id: string;
  createdAt: string;
  updatedAt: string;
  nextPileId: number;
  nextEvidenceId: number;
  piles: PileRecord[];
}

export interface WorkspacePayload {
  schemaVersion: number;
  workspace: WorkspaceRecord;
}

export interface PreviewPayload {
  schemaVersion: number;
  prompt: string;
  warning?: string;
}

export interface EvidencePayload {
  schemaVersion: number;
  evidence: EvidenceRecord;
}

export interface ExtractPayload {
  schemaVersion: number;
  entitySpans: EntitySpan[];
  evidence: EvidenceRecord;
}

export interface LinkPayload {
  schemaVersion: number;
  sentenceLinks: SentenceLink[];
  evidence: EvidenceRecord;
}

export interface SuggestPayload {
  schemaVersion: number;
  suggestions: Suggestion[];
  pile: PileRecord;
  evidence: EvidenceRecord;
}

export interface MetaDefaults {
  searchK: number;
  factK: number;
  suggestK: number;
  linkFloor: number;
}

export interface MetaPayload {
  schemaVersion: number;
  corpusSize: number;
  factCount: number;
  taskKinds: string[];
  temperatureRange: [number, number];
  defaults: MetaDefaults;
}

export interface ErrorPayload {
  schemaVersion: number;
  error: string;
}

/** Keys the server accepts for grouping and sorting the document list. */
export const GROUP_KEYS = ["date", "name", "length", "topic"] as const;
export type GroupKey = (typeof GROUP_KEYS)[number];
