/** Browser bootstrap: hash routing plus event wiring. All rendering goes
 * through the pure view functions; this file only touches the DOM. */

import { ApiClient, fetchTransport } from "./api.js";
import { GraphController, renderGraph } from "./views/graph.js";
import { CvePanelController, renderCvePanel } from "./views/cve.js";
import { renderSearch, SearchController } from "./views/search.js";

function mustGet(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id} container`);
  return element;
}

const main = mustGet("app");

const client = new ApiClient(fetchTransport(""));

const searchBox = document.getElementById("search-box") as HTMLInputElement | null;
const search = new SearchController(client, (state) => {
  if (location.hash === "" || location.hash === "#/" || location.hash.startsWith("#/search")) {
    main.innerHTML = renderSearch(state);
  }
});
searchBox?.addEventListener("input", () => search.onInput(searchBox.value));

const graph = new GraphController(client, (state) => {
  if (location.hash.startsWith("#/graph/")) {
    main.innerHTML = renderGraph(state);
  }
});

const cvePanel = new CvePanelController(client, (state) => {
  if (location.hash.startsWith("#/cert/")) {
    main.innerHTML = renderCvePanel(state);
    const key = state.detail?.record.record_key;
    if (key) {
      const link = document.createElement("a");
      link.href = `#/graph/${key}`;
      link.textContent = "View reference graph";
      link.className = "graph-link";
      main.appendChild(link);
    }
  }
});

main.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const nodeMark = target.closest<HTMLElement>("[data-canonical]");
  if (nodeMark?.dataset.canonical) {
    const canonical = nodeMark.dataset.canonical;
    if (graph.state.selected === canonical) {
      void graph.expand(canonical); // second click on a selected node grows the ring
    } else {
      graph.select(canonical);
    }
    return;
  }
  const subscribe = target.closest<HTMLElement>("button.subscribe");
  if (subscribe) {
    void cvePanel.subscribe();
  }
});

function route(): void {
  const hash = location.hash;
  if (hash.startsWith("#/cert/")) {
    void cvePanel.load(decodeURIComponent(hash.slice("#/cert/".length)));
  } else if (hash.startsWith("#/graph/")) {
    void graph.init(decodeURIComponent(hash.slice("#/graph/".length)));
  } else {
    main.innerHTML = renderSearch(search.state);
  }
}

window.addEventListener("hashchange", route);
route();
