import { ApiClient } from "../api.js";
import { esc, html, raw } from "../html.js";
import { forceLayout } from "../layout.js";
import type { GraphEdge, GraphNode, ReferencesResponse } from "../types.js";

export const MAX_EXPANSION_DEPTH = 5;

interface PlacedNode extends GraphNode {
  depth: number;
}

export interface GraphState {
  status: "loading" | "ready" | "not_found" | "error";
  centerKey: string;
  center: string | null;
  direction: string;
  nodes: Map<string, PlacedNode>;
  edges: Map<string, GraphEdge>;
  selected: string | null;
  message?: string;
}

function edgeKey(edge: GraphEdge): string {
  return `${edge.src}->${edge.dst}`;
}

/** Interactive reference-graph view: loads a neighborhood, merges further
 * rings fetched when nodes are expanded (capped at depth 5), and tracks the
 * selected node for the side panel. All numbers come from the API. */
export class GraphController {
  state: GraphState;
  private expanded = new Set<string>();

  constructor(
    private client: ApiClient,
    private onChange: (state: GraphState) => void,
    private maxDepth = MAX_EXPANSION_DEPTH,
  ) {
    this.state = {
      status: "loading",
      centerKey: "",
      center: null,
      direction: "in",
      nodes: new Map(),
      edges: new Map(),
      selected: null,
    };
  }

  async init(recordKey: string, depth = 1, direction = "in"): Promise<void> {
    this.state = {
      ...this.state,
      status: "loading",
      centerKey: recordKey,
      direction,
      nodes: new Map(),
      edges: new Map(),
      selected: null,
    };
    this.onChange(this.state);
    let payload: ReferencesResponse;
    try {
      payload = await this.client.references(recordKey, direction, depth);
    } catch (error) {
      const status = (error as { status?: number }).status;
      this.state = {
        ...this.state,
        status: status === 404 ? "not_found" : "error",
        message: String(error),
      };
      this.onChange(this.state);
      return;
    }
    this.merge(payload, 0);
    this.state = {
      ...this.state,
      status: "ready",
      center: payload.center,
      selected: payload.center,
    };
    this.onChange(this.state);
  }

  /** Fetch the next neighborhood ring around an on-screen node. One fetch
   * per node; nodes at the depth cap do not expand. */
  async expand(canonical: string): Promise<boolean> {
    const node = this.state.nodes.get(canonical);
    if (
      !node ||
      node.depth >= this.maxDepth ||
      node.record_keys.length === 0 ||
      this.expanded.has(canonical)
    ) {
      return false;
    }
    this.expanded.add(canonical);
    const payload = await this.client.references(node.record_keys[0], this.state.direction, 1);
    this.merge(payload, node.depth);
    this.onChange(this.state);
    return true;
  }

  select(canonical: string): void {
    if (this.state.nodes.has(canonical)) {
      this.state = { ...this.state, selected: canonical };
      this.onChange(this.state);
    }
  }

  private merge(payload: ReferencesResponse, baseDepth: number): void {
    for (const node of payload.nodes) {
      const depth = node.canonical === payload.center ? baseDepth : baseDepth + 1;
      const existing = this.state.nodes.get(node.canonical);
      if (existing) {
        existing.depth = Math.min(existing.depth, depth);
      } else {
        this.state.nodes.set(node.canonical, { ...node, depth });
      }
    }
    for (const edge of payload.edges) {
      this.state.edges.set(edgeKey(edge), edge);
    }
  }
}

function sidePanel(state: GraphState): string {
  if (!state.selected) return html`<aside class="graph-panel">Select a node.</aside>`;
  const node = state.nodes.get(state.selected);
  if (!node) return html`<aside class="graph-panel">Select a node.</aside>`;
  const links = node.record_keys
    .map((key) => html`<a href="#/cert/${key}" class="panel-link">${key}</a>`)
    .join(" ");
  return html`<aside class="graph-panel">
    <h3>${node.canonical}</h3>
    <p class="panel-title">${node.title ?? "(unknown title)"}</p>
    <p class="panel-status">${node.vulnerable ? "has known CVEs" : "no known CVEs"}</p>
    <p class="panel-keys">${raw(links)}</p>
  </aside>`;
}

export function renderGraph(state: GraphState): string {
  if (state.status === "loading") {
    return html`<div class="graph-loading">Loading reference graph…</div>`;
  }
  if (state.status === "not_found") {
    return html`<div class="banner banner-error" role="alert">Certificate ${state.centerKey} was not found.</div>`;
  }
  if (state.status === "error") {
    return html`<div class="banner banner-error" role="alert">Could not load references: ${state.message}</div>`;
  }
  const ids = [...state.nodes.keys()];
  const positions = forceLayout(
    ids,
    [...state.edges.values()].map((e) => [e.src, e.dst]),
  );
  const edgeLines = [...state.edges.values()]
    .sort((a, b) => edgeKey(a).localeCompare(edgeKey(b)))
    .map((edge) => {
      const a = positions.get(edge.src);
      const b = positions.get(edge.dst);
      if (!a || !b) return "";
      return html`<line class="edge" data-edge="${edgeKey(edge)}"
        x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}">
        <title>${edge.src} → ${edge.dst} (${edge.provenance.join(", ")})</title></line>`;
    })
    .join("");
  const nodeMarks = ids
    .sort()
    .map((id) => {
      const node = state.nodes.get(id)!;
      const p = positions.get(id)!;
      const classes = [
        "node",
        node.vulnerable ? "vulnerable" : "",
        id === state.center ? "center" : "",
        id === state.selected ? "selected" : "",
      ]
        .filter(Boolean)
        .join(" ");
      return html`<g class="${classes}" data-canonical="${id}" transform="translate(${p.x},${p.y})">
        <circle r="${id === state.center ? 12 : 9}"></circle>
        <text y="22">${node.canonical}</text>
      </g>`;
    })
    .join("");
  return html`<div class="graph-view">
    <svg viewBox="0 0 640 480" class="graph-svg" role="img">
      ${raw(edgeLines)}${raw(nodeMarks)}
    </svg>
    ${raw(sidePanel(state))}
  </div>`;
}

export { esc as escapeGraphHtml };
