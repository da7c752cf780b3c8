/** Shapes of the query-API payloads the UI consumes. Unknown extra fields
 * are simply ignored by the renderers: every view reads only what is
 * declared here. */

export interface CertSummary {
  record_key: string;
  scheme: string;
  category: string;
  title: string;
  vendor: string;
  cert_date: string;
  expiry_date: string | null;
  status: string;
  declared_eal: string | null;
  canonical_id: string | null;
  cve_count: number;
}

export interface SearchResponse {
  results: CertSummary[];
  count: number;
}

export interface CveInfo {
  id: string;
  published?: string;
  base_score?: number;
  cwe_ids?: string[];
  timeline?: "before_cert" | "during_validity" | "after_expiry";
}

export type FeatureHits = Record<string, Record<string, Record<string, number>>>;

export interface CertDetail {
  record: CertSummary;
  features: FeatureHits;
  matched_cpes: [string, number][];
  cves: CveInfo[];
  threshold_used: number | null;
}

export interface GraphNode {
  canonical: string;
  record_keys: string[];
  title: string | null;
  vulnerable: boolean;
}

export interface GraphEdge {
  src: string;
  dst: string;
  provenance: string[];
}

export interface ReferencesResponse {
  center: string | null;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface SubscriptionResponse {
  id: number;
  selector: string;
  sink: string;
}
