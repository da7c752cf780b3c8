import { ApiClient } from "../api.js";
import { html, raw } from "../html.js";
import type { CertDetail, CveInfo } from "../types.js";

export interface CvePanelState {
  status: "loading" | "ready" | "error";
  recordKey: string;
  detail: CertDetail | null;
  message?: string;
  toast: string | null;
}

const TIMELINE_LABELS: Record<string, string> = {
  before_cert: "disclosed before certification",
  during_validity: "disclosed during validity",
  after_expiry: "disclosed after expiry",
};

/** Vulnerability panel for one certificate: matched CVEs with severity,
 * weakness tags and a disclosure-timeline marker, plus a change
 * subscription button. */
export class CvePanelController {
  state: CvePanelState = { status: "loading", recordKey: "", detail: null, toast: null };

  constructor(
    private client: ApiClient,
    private onChange: (state: CvePanelState) => void,
  ) {}

  async load(recordKey: string): Promise<void> {
    this.state = { status: "loading", recordKey, detail: null, toast: null };
    this.onChange(this.state);
    try {
      const detail = await this.client.certDetail(recordKey);
      this.state = { ...this.state, status: "ready", detail };
    } catch (error) {
      this.state = { ...this.state, status: "error", message: String(error) };
    }
    this.onChange(this.state);
  }

  async subscribe(): Promise<void> {
    try {
      await this.client.subscribe(`record_key:${this.state.recordKey}`);
      this.state = { ...this.state, toast: "Subscribed to changes for this certificate." };
    } catch (error) {
      this.state = { ...this.state, toast: null, message: `Subscription failed: ${error}` };
    }
    this.onChange(this.state);
  }
}

function cveRow(cve: CveInfo): string {
  const cwes = (cve.cwe_ids ?? [])
    .map((cwe) => html`<span class="tag">${cwe}</span>`)
    .join("");
  const timeline = cve.timeline ? TIMELINE_LABELS[cve.timeline] ?? cve.timeline : "";
  return html`<li class="cve" data-cve="${cve.id}">
    <span class="cve-id">${cve.id}</span>
    <span class="cve-score">${cve.base_score ?? "?"}</span>
    <span class="cve-published">${cve.published ?? ""}</span>
    <span class="cve-timeline">${timeline}</span>
    <span class="cve-cwes">${raw(cwes)}</span>
  </li>`;
}

export function renderCvePanel(state: CvePanelState): string {
  if (state.status === "loading") {
    return html`<div class="cve-loading">Loading vulnerabilities…</div>`;
  }
  if (state.status === "error" || !state.detail) {
    return html`<div class="banner banner-error" role="alert">Could not load certificate: ${state.message}</div>`;
  }
  const { record, cves } = state.detail;
  const toast = state.toast ? html`<div class="toast" role="status">${state.toast}</div>` : "";
  const failure = state.message
    ? html`<div class="banner banner-error" role="alert">${state.message}</div>`
    : "";
  const body = cves.length
    ? html`<ul class="cves">${raw(cves.map(cveRow).join(""))}</ul>`
    : html`<div class="cve-empty">No known CVEs map to this certificate.</div>`;
  return html`<section class="cve-panel">
    <header>
      <h2>${record.title}</h2>
      <span class="cve-panel-id">${record.canonical_id ?? "(no ID)"}</span>
      <span class="cve-panel-dates">certified ${record.cert_date}${
        record.expiry_date ? html` · expires ${record.expiry_date}` : ""
      }</span>
      <button class="subscribe" data-record-key="${record.record_key}">Subscribe to changes</button>
    </header>
    ${raw(toast)}${raw(failure)}${raw(body)}
  </section>`;
}
