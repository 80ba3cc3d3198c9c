/**
 * Faceted filtering, derived from the model: equality chips for
 * low-cardinality text/boolean columns (cardinality probed with
 * attributegroup counts), range inputs for numeric and date/time columns.
 */

import { Api } from "./api.js";
import { CHIP_TYPES, RANGE_TYPES, TableDoc, visibleColumns } from "./display.js";
import { DataUrl, Filter } from "./urlbuilder.js";

export const MAX_CHIPS = 12;

export interface FacetChip {
  value: string | null; // null = the rows where the column is null
  count: number;
  selected: boolean;
}

export interface Facet {
  column: string;
  type: string;
  kind: "chips" | "range";
  chips: FacetChip[];
  low: string;  // raw text bounds for range facets
  high: string;
}

export async function deriveFacets(api: Api, catalog: string, table: TableDoc):
    Promise<Facet[]> {
  const out: Facet[] = [];
  for (const col of visibleColumns(table, "list")) {
    if (CHIP_TYPES.has(col.type)) {
      const url = new DataUrl(catalog, "attributegroup")
        .table(table.name, table.schema_name)
        .groupBy([col.name], [{ name: "cnt", fn: "cnt" }])
        .limit(MAX_CHIPS + 1)
        .build();
      const groups = await api.rows(url);
      if (groups.rows.length <= MAX_CHIPS) {
        out.push({
          column: col.name,
          type: col.type,
          kind: "chips",
          chips: groups.rows.map((g) => ({
            value: g[col.name] === null ? null : String(g[col.name]),
            count: Number(g["cnt"] ?? 0),
            selected: false,
          })),
          low: "",
          high: "",
        });
      }
    } else if (RANGE_TYPES.has(col.type)) {
      out.push({ column: col.name, type: col.type, kind: "range",
                 chips: [], low: "", high: "" });
    }
  }
  return out;
}

/** Filter segments for the current facet state: chips of one facet OR
 * together, facets AND together, ranges AND their bounds. */
export function applyFacets(url: DataUrl, facets: Facet[]): DataUrl {
  for (const facet of facets) {
    if (facet.kind === "chips") {
      const picked = facet.chips.filter((c) => c.selected);
      if (picked.length) {
        url.anyOf(...picked.map((c): Filter =>
          c.value === null
            ? { column: facet.column, op: "null" }
            : { column: facet.column, op: "=", operand: c.value }));
      }
    } else {
      const bounds: Filter[] = [];
      if (facet.low !== "") bounds.push({ column: facet.column, op: "geq", operand: facet.low });
      if (facet.high !== "") bounds.push({ column: facet.column, op: "leq", operand: facet.high });
      if (bounds.length) url.filter(...bounds);
    }
  }
  return url;
}
