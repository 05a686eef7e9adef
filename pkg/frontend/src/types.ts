/** Types for the export directory written by `ctm export-browser`. */

export const EXPORT_SCHEMA_VERSION = 1;

export interface Manifest {
  schema_version: number;
  files: string[];
  K: number;
  D: number;
}

export interface TopicEntry {
  id: number;
  top_words: [string, number][];
}

export interface ModelDoc {
  schema_version: number;
  K: number;
  topics: TopicEntry[];
}

export interface GraphNode {
  id: number;
  top_words?: [string, number][];
  prevalence?: number;
}

export interface GraphEdge {
  source: number;
  target: number;
  weight: number;
}

export interface GraphDoc {
  schema_version: number;
  rho: number;
  nodes: GraphNode[];
  and_edges: GraphEdge[];
  or_edges: GraphEdge[];
}

export interface DocumentEntry {
  id: string;
  title: string;
  year: string;
  theta: number[];
  top_topics: number[];
}

export interface DocumentsDoc {
  schema_version: number;
  documents: DocumentEntry[];
}

export interface MomentEntry {
  id: string;
  m: number[];
}

export interface MomentsDoc {
  schema_version: number;
  moments: MomentEntry[];
}

export interface BrowserExport {
  manifest: Manifest;
  model: ModelDoc;
  graph: GraphDoc;
  documents: DocumentsDoc;
  moments: MomentsDoc;
}
