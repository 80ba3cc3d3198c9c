/**
 * Browser bootstrap: hash routing plus event wiring over the pure
 * controllers and renderers. Configuration comes from window.CATALOG_UI
 * (base URL, catalog id, optional bearer token) or URL parameters.
 */

import { Api, AppConfig, Row } from "./api.js";
import {
  EditState, ListingState, browse, emptyListing, keyFilters, recordDetail,
  saveEdit, startEdit,
} from "./controllers.js";
import { ModelDoc, TableDoc, allTables, findTable } from "./display.js";
import { deriveFacets } from "./facets.js";
import { renderDetail, renderEditForm, renderListing, renderNav } from "./render.js";
import { Filter } from "./urlbuilder.js";

declare global {
  interface Window {
    CATALOG_UI?: Partial<AppConfig>;
  }
}

function config(): AppConfig {
  const params = new URLSearchParams(window.location.search);
  const given = window.CATALOG_UI ?? {};
  return {
    baseUrl: params.get("service") ?? given.baseUrl ?? window.location.origin,
    catalog: params.get("catalog") ?? given.catalog ?? "1",
    token: params.get("token") ?? given.token,
  };
}

interface AppState {
  model: ModelDoc;
  table: TableDoc | null;
  listing: ListingState;
  edit: EditState | null;
  editRow: Row | null;
}

export async function main(root: HTMLElement): Promise<void> {
  const cfg = config();
  const api = new Api(cfg);
  const model = await api.introspect();
  const state: AppState = {
    model, table: null, listing: emptyListing(), edit: null, editRow: null,
  };

  async function showListing(table: TableDoc, reset: boolean): Promise<void> {
    state.table = table;
    if (reset) {
      state.listing = emptyListing();
      state.listing.facets = await deriveFacets(api, cfg.catalog, table);
    }
    const result = await browse(api, cfg.catalog, table, state.listing);
    root.innerHTML =
      renderNav(allTables(model), table) +
      renderListing(table, state.listing, result);
    wireListing(table, result.nextAfter);
  }

  async function showDetail(table: TableDoc, filters: Filter[]): Promise<void> {
    state.table = table;
    const result = await recordDetail(api, cfg.catalog, model, table, filters);
    root.innerHTML = renderNav(allTables(model), table) + renderDetail(table, result);
    const editButton = root.querySelector("button.edit");
    if (editButton && result.row) {
      const row = result.row;
      editButton.addEventListener("click", () => {
        state.edit = startEdit(table, row, result.etag);
        state.editRow = row;
        showEdit(table);
      });
    }
  }

  function showEdit(table: TableDoc): void {
    if (!state.edit) return;
    root.innerHTML = renderNav(allTables(model), table) +
      renderEditForm(table, state.edit);
    const form = root.querySelector("form.edit-form") as HTMLFormElement | null;
    if (!form) return;
    form.addEventListener("input", (ev) => {
      const el = ev.target as HTMLInputElement;
      const edit = state.edit;
      if (!edit) return;
      if (el.dataset.field !== undefined) {
        edit.fields[Number(el.dataset.field)]!.text = el.value;
      } else if (el.dataset.null !== undefined) {
        edit.fields[Number(el.dataset.null)]!.setNull = el.checked;
      }
    });
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void (async () => {
        if (!state.edit || !state.editRow) return;
        state.edit = await saveEdit(api, cfg.catalog, table, state.edit);
        if (state.edit.saved) {
          await showDetail(table, keyFilters(table, state.editRow));
        } else {
          showEdit(table);
        }
      })();
    });
    const reload = root.querySelector("button.reload");
    if (reload) {
      reload.addEventListener("click", (ev) => {
        ev.preventDefault();
        if (state.editRow) void showDetail(table, keyFilters(table, state.editRow));
      });
    }
  }

  function wireListing(table: TableDoc, nextAfter: (string | null)[] | null): void {
    const search = root.querySelector("input.search") as HTMLInputElement | null;
    search?.addEventListener("change", () => {
      state.listing.search = search.value;
      state.listing.after = null;
      state.listing.pageStack = [];
      void showListing(table, false);
    });
    root.querySelectorAll("[data-sort]").forEach((el) => {
      el.addEventListener("click", (ev) => {
        ev.preventDefault();
        const column = (el as HTMLElement).dataset.sort!;
        const current = state.listing.sort.find((s) => s.column === column);
        state.listing.sort = [{ column, descending: current ? !current.descending : false }];
        state.listing.after = null;
        state.listing.pageStack = [];
        void showListing(table, false);
      });
    });
    root.querySelectorAll("button[data-chip]").forEach((el) => {
      el.addEventListener("click", () => {
        const button = el as HTMLElement;
        const facet = state.listing.facets.find((f) => f.column === button.dataset.facet);
        const chip = facet?.chips[Number(button.dataset.chip)];
        if (chip) chip.selected = !chip.selected;
        state.listing.after = null;
        state.listing.pageStack = [];
        void showListing(table, false);
      });
    });
    root.querySelectorAll("input.range-low, input.range-high").forEach((el) => {
      el.addEventListener("change", () => {
        const input = el as HTMLInputElement;
        const facet = state.listing.facets.find((f) => f.column === input.dataset.facet);
        if (facet) {
          if (input.classList.contains("range-low")) facet.low = input.value;
          else facet.high = input.value;
        }
        state.listing.after = null;
        state.listing.pageStack = [];
        void showListing(table, false);
      });
    });
    root.querySelector('button[data-page="next"]')?.addEventListener("click", () => {
      if (!nextAfter) return;
      state.listing.pageStack.push(state.listing.after);
      state.listing.after = nextAfter;
      void showListing(table, false);
    });
    root.querySelector('button[data-page="prev"]')?.addEventListener("click", () => {
      if (!state.listing.pageStack.length) return;
      state.listing.after = state.listing.pageStack.pop() ?? null;
      void showListing(table, false);
    });
    root.querySelectorAll("tr[data-row]").forEach((el) => {
      el.addEventListener("dblclick", () => {
        const ref = JSON.parse((el as HTMLElement).dataset.row!) as Row;
        void showDetail(table, keyFilters(table, ref));
      });
    });
  }

  async function route(): Promise<void> {
    const hash = window.location.hash.replace(/^#\/?/, "");
    const parts = hash.split("/").map(decodeURIComponent);
    if (parts[0] === "t" && parts[1] && parts[2]) {
      const table = findTable(model, parts[1], parts[2]);
      if (table) {
        await showListing(table, true);
        return;
      }
    }
    const first = allTables(model)[0];
    if (first) await showListing(first, true);
    else root.innerHTML = renderNav([], null) + "<p class='zero-state'>empty catalog</p>";
  }

  window.addEventListener("hashchange", () => void route());
  await route();
}

if (typeof document !== "undefined" && document.getElementById("catalog-app")) {
  void main(document.getElementById("catalog-app")!);
}
