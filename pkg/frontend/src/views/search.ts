import { ApiClient } from "../api.js";
import { debounce, Timer } from "../debounce.js";
import { esc, html, raw } from "../html.js";
import type { CertSummary } from "../types.js";

export type SearchState =
  | { kind: "prompt" }
  | { kind: "loading"; query: string }
  | { kind: "results"; query: string; results: CertSummary[] }
  | { kind: "error"; query: string; message: string };

export interface SearchFilters {
  scheme?: string;
  category?: string;
  status?: string;
}

/** Debounced title + full-text search. Wildcards (* and ?) pass through to
 * the API untouched; an empty query never issues a request. */
export class SearchController {
  state: SearchState = { kind: "prompt" };
  private scheduled: (query: string, filters: SearchFilters) => void;
  private generation = 0;

  constructor(
    private client: ApiClient,
    private onChange: (state: SearchState) => void,
    timer?: Timer,
    delayMs = 250,
  ) {
    this.scheduled = debounce(
      (query: string, filters: SearchFilters) => void this.execute(query, filters),
      delayMs,
      timer,
    );
  }

  onInput(query: string, filters: SearchFilters = {}): void {
    if (!query.trim()) {
      this.generation++;
      this.update({ kind: "prompt" });
      return;
    }
    this.update({ kind: "loading", query });
    this.scheduled(query, filters);
  }

  private async execute(query: string, filters: SearchFilters): Promise<void> {
    const generation = ++this.generation;
    try {
      const [titles, fulltext] = await Promise.all([
        this.client.searchTitles(query, filters as Record<string, string>),
        this.client.searchFulltext(query),
      ]);
      if (generation !== this.generation) return; // superseded by newer input
      const seen = new Set<string>();
      const merged: CertSummary[] = [];
      for (const result of [...titles.results, ...fulltext.results]) {
        if (!seen.has(result.record_key)) {
          seen.add(result.record_key);
          merged.push(result);
        }
      }
      this.update({ kind: "results", query, results: merged });
    } catch (error) {
      if (generation !== this.generation) return;
      this.update({ kind: "error", query, message: String(error) });
    }
  }

  private update(state: SearchState): void {
    this.state = state;
    this.onChange(state);
  }
}

function resultRow(result: CertSummary): string {
  const badge = result.cve_count
    ? html`<span class="badge badge-vuln">${result.cve_count} CVE${result.cve_count === 1 ? "" : "s"}</span>`
    : html`<span class="badge badge-clean">no CVEs</span>`;
  return html`<li class="result" data-record-key="${result.record_key}">
    <a href="#/cert/${result.record_key}" class="result-title">${result.title}</a>
    <span class="result-id">${result.canonical_id ?? "(no ID)"}</span>
    <span class="result-meta">${result.scheme} · ${result.category} · ${result.status}</span>
    ${raw(badge)}
  </li>`;
}

export function renderSearch(state: SearchState): string {
  switch (state.kind) {
    case "prompt":
      return html`<div class="search-empty">Type a product name, certificate ID, or a
        wildcard pattern like <code>00.03.11.0*</code> to search titles and full text.</div>`;
    case "loading":
      return html`<div class="search-loading">Searching for <strong>${state.query}</strong>…</div>`;
    case "error":
      return html`<div class="banner banner-error" role="alert">Search failed: ${state.message}</div>`;
    case "results": {
      if (state.results.length === 0) {
        return html`<div class="search-empty">No certificates match <strong>${state.query}</strong>.</div>`;
      }
      const rows = state.results.map(resultRow).join("");
      return html`<div class="search-count">${state.results.length} certificate${
        state.results.length === 1 ? "" : "s"
      }</div><ul class="results">${raw(rows)}</ul>`;
    }
  }
}

export { esc as escapeHtml };
