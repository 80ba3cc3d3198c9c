/**
 * Page controllers: pure data flow between the HTTP client and the
 * renderers, so every behavior is testable without a DOM.
 */

import { Api, Row, SaveResult } from "./api.js";
import {
  ColumnDoc, ModelDoc, RelatedLink, TableDoc, relatedLinks, rowKey,
  visibleColumns,
} from "./display.js";
import { Facet, applyFacets } from "./facets.js";
import { DataUrl, Filter, SortKey, literalText } from "./urlbuilder.js";

export const PAGE_SIZE = 25;
export const RELATED_PAGE = 5;

export interface ListingState {
  search: string;
  facets: Facet[];
  sort: SortKey[];          // user choice; key columns appended for paging
  after: (string | null)[] | null;
  pageStack: ((string | null)[] | null)[]; // positions of previous pages
}

export function emptyListing(): ListingState {
  return { search: "", facets: [], sort: [], after: null, pageStack: [] };
}

/** Effective, paging-safe sort: the user's keys plus the row key. */
export function effectiveSort(table: TableDoc, sort: SortKey[]): SortKey[] {
  const keys = [...sort];
  for (const k of rowKey(table) ?? []) {
    if (!keys.some((s) => s.column === k)) keys.push({ column: k });
  }
  return keys;
}

export function listingUrl(catalog: string, table: TableDoc, state: ListingState): string {
  const url = new DataUrl(catalog, "entity").table(table.name, table.schema_name);
  if (state.search) url.search(state.search);
  applyFacets(url, state.facets);
  const sort = effectiveSort(table, state.sort);
  if (sort.length) url.sort(...sort);
  if (state.after) url.after(state.after);
  return url.limit(PAGE_SIZE).build();
}

export interface ListingResult {
  rows: Row[];
  etag: string | null;
  columns: ColumnDoc[];
  nextAfter: (string | null)[] | null;
}

export async function browse(api: Api, catalog: string, table: TableDoc,
                             state: ListingState): Promise<ListingResult> {
  const result = await api.rows(listingUrl(catalog, table, state));
  const sort = effectiveSort(table, state.sort);
  let nextAfter: (string | null)[] | null = null;
  if (result.rows.length === PAGE_SIZE && sort.length) {
    const last = result.rows[result.rows.length - 1]!;
    const types = new Map(table.columns.map((c) => [c.name, c.type]));
    nextAfter = sort.map((k) => {
      const v = last[k.column];
      return v === null || v === undefined ? null : literalText(types.get(k.column) ?? "text", v);
    });
  }
  return {
    rows: result.rows,
    etag: result.etag,
    columns: visibleColumns(table, "list"),
    nextAfter,
  };
}

// --- record detail ---------------------------------------------------------

export function keyFilters(table: TableDoc, row: Row): Filter[] {
  const key = rowKey(table);
  if (!key) throw new Error(`table ${table.name} has no key`);
  const types = new Map(table.columns.map((c) => [c.name, c.type]));
  return key.map((k) => ({
    column: k,
    op: "=" as const,
    operand: literalText(types.get(k) ?? "text", row[k]),
  }));
}

export interface RelatedSection {
  link: RelatedLink;
  count: number;
  rows: Row[];
  columns: ColumnDoc[];
}

export interface DetailResult {
  row: Row | null; // null = the URL denotes the empty set now
  etag: string | null;
  columns: ColumnDoc[];
  related: RelatedSection[];
}

export async function recordDetail(api: Api, catalog: string, model: ModelDoc,
                                   table: TableDoc, filters: Filter[]):
    Promise<DetailResult> {
  const url = new DataUrl(catalog, "entity")
    .table(table.name, table.schema_name).filter(...filters).limit(1).build();
  const result = await api.rows(url);
  const row = result.rows[0] ?? null;
  const related: RelatedSection[] = [];
  if (row !== null) {
    for (const link of relatedLinks(model, table)) {
      const childTypes = new Map(link.table.columns.map((c) => [c.name, c.type]));
      const linkFilters: Filter[] = link.fkColumns.map((fkCol, i) => {
        const refValue = row[link.refColumns[i]!];
        return refValue === null || refValue === undefined
          ? { column: fkCol, op: "null" as const }
          : { column: fkCol, op: "=" as const,
              operand: literalText(childTypes.get(fkCol) ?? "text", refValue) };
      });
      const countUrl = new DataUrl(catalog, "aggregate")
        .table(link.table.name, link.table.schema_name)
        .filter(...linkFilters)
        .aggregate({ name: "cnt", fn: "cnt" })
        .build();
      const firstPage = new DataUrl(catalog, "entity")
        .table(link.table.name, link.table.schema_name)
        .filter(...linkFilters)
        .sort(...effectiveSort(link.table, []))
        .limit(RELATED_PAGE)
        .build();
      const [count, page] = await Promise.all([api.count(countUrl), api.rows(firstPage)]);
      related.push({
        link,
        count,
        rows: page.rows,
        columns: visibleColumns(link.table, "list"),
      });
    }
  }
  return { row, etag: result.etag, columns: visibleColumns(table, "detail"), related };
}

// --- edit form ----------------------------------------------------------------

export interface FieldState {
  column: ColumnDoc;
  text: string;        // current input text
  setNull: boolean;    // explicit null toggle for nullable columns
  error: string | null;
}

export interface EditState {
  fields: FieldState[];
  etag: string | null; // the page-load tag carried into If-Match
  conflict: boolean;
  saveError: string | null;
  saved: boolean;
}

export function fieldText(column: ColumnDoc, value: unknown): string {
  if (value === null || value === undefined) return "";
  if (column.type === "json") return JSON.stringify(value);
  if (column.type === "boolean") return value ? "true" : "false";
  return String(value);
}

export function startEdit(table: TableDoc, row: Row, etag: string | null): EditState {
  return {
    fields: visibleColumns(table, "edit").map((column) => ({
      column,
      text: fieldText(column, row[column.name]),
      setNull: row[column.name] === null,
      error: null,
    })),
    etag,
    conflict: false,
    saveError: null,
    saved: false,
  };
}

/** Parse one field into a payload value; returns [value, error]. */
export function fieldValue(field: FieldState): [unknown, string | null] {
  const col = field.column;
  if (field.setNull || (field.text === "" && col.type !== "text")) {
    if (!col.nullable) return [null, "a value is required"];
    return [null, null];
  }
  const text = field.text;
  switch (col.type) {
    case "int8": {
      if (!/^[+-]?[0-9]+$/.test(text.trim())) return [null, "expected an integer"];
      return [Number(text), null];
    }
    case "float8": {
      const n = Number(text);
      if (!Number.isFinite(n)) return [null, "expected a number"];
      return [n, null];
    }
    case "boolean": {
      if (text === "true") return [true, null];
      if (text === "false") return [false, null];
      return [null, "expected true or false"];
    }
    case "json": {
      try {
        return [JSON.parse(text), null];
      } catch {
        return [null, "expected valid JSON"];
      }
    }
    default:
      return [text, null];
  }
}

/** Client-side validation pass; marks field errors, returns the payload. */
export function validateEdit(state: EditState): Row | null {
  const row: Row = {};
  let ok = true;
  for (const field of state.fields) {
    const [value, error] = fieldValue(field);
    field.error = error;
    if (error) ok = false;
    else row[field.column.name] = value;
  }
  return ok ? row : null;
}

export async function saveEdit(api: Api, catalog: string, table: TableDoc,
                               state: EditState): Promise<EditState> {
  const row = validateEdit(state);
  if (row === null) return { ...state, saved: false };
  const key = rowKey(table);
  if (key) {
    for (const k of key) {
      if (!(k in row)) {
        // key columns ride along even when hidden from the edit context
        const hidden = state.fields.find((f) => f.column.name === k);
        if (!hidden) return { ...state, saveError: `key column ${k} is not editable` };
      }
    }
  }
  const url = new DataUrl(catalog, "entity").table(table.name, table.schema_name).build();
  const result: SaveResult = await api.saveEntity(url, [row], state.etag);
  if (result.conflict) {
    return { ...state, conflict: true, saved: false, saveError: null };
  }
  if (!result.ok) {
    return { ...state, saved: false, saveError: result.error?.message ?? "save failed" };
  }
  return { ...state, etag: result.etag, conflict: false, saved: true, saveError: null };
}
