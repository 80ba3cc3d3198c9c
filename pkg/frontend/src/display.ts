/**
 * DisplayModel: presentation rules derived entirely from introspection.
 *
 * Nothing here knows any concrete table or column name; a catalog with a
 * freshly generated model renders the same way. The one annotation the UI
 * honors is visible-columns, whose payload is {context: [column names]}
 * with contexts "list", "detail", "edit"; a malformed payload falls back
 * to all columns in declared order.
 */

export const VISIBLE_COLUMNS_KEY = "tag:isrd.isi.edu,2016:visible-columns";

export interface ColumnDoc {
  name: string;
  type: string;
  nullable: boolean;
  default: unknown;
  comment: string | null;
  annotations: Record<string, unknown>;
}

export interface KeyDoc {
  columns: string[];
}

export interface FkeyDoc {
  name: string | null;
  columns: string[];
  references: { schema: string; table: string; columns: string[] };
}

export interface TableDoc {
  schema_name: string;
  name: string;
  kind: string;
  comment: string | null;
  annotations: Record<string, unknown>;
  columns: ColumnDoc[];
  keys: KeyDoc[];
  foreign_keys: FkeyDoc[];
}

export interface SchemaDoc {
  name: string;
  comment: string | null;
  annotations: Record<string, unknown>;
  tables: Record<string, TableDoc>;
}

export interface ModelDoc {
  schemas: Record<string, SchemaDoc>;
}

export type DisplayContext = "list" | "detail" | "edit";

export function allTables(model: ModelDoc): TableDoc[] {
  const out: TableDoc[] = [];
  for (const schema of Object.values(model.schemas)) {
    out.push(...Object.values(schema.tables));
  }
  return out;
}

export function findTable(model: ModelDoc, schema: string, name: string): TableDoc | null {
  return model.schemas[schema]?.tables[name] ?? null;
}

/** Columns to show in a context, honoring a well-formed visible-columns
 * annotation and ignoring anything else. */
export function visibleColumns(table: TableDoc, context: DisplayContext): ColumnDoc[] {
  const byName = new Map(table.columns.map((c) => [c.name, c]));
  const payload = table.annotations[VISIBLE_COLUMNS_KEY];
  if (payload && typeof payload === "object" && !Array.isArray(payload)) {
    const names = (payload as Record<string, unknown>)[context];
    if (Array.isArray(names) && names.every((n) => typeof n === "string")) {
      const picked = (names as string[])
        .map((n) => byName.get(n))
        .filter((c): c is ColumnDoc => c !== undefined);
      if (picked.length) return picked;
    }
  }
  return table.columns;
}

/** The key used to address single records: the first declared key. */
export function rowKey(table: TableDoc): string[] | null {
  const key = table.keys[0];
  return key ? [...key.columns] : null;
}

export interface RelatedLink {
  table: TableDoc;      // the referring table
  fkColumns: string[];  // its columns pointing at us
  refColumns: string[]; // our referenced columns
}

/** Inbound foreign keys, one related-entity section each. */
export function relatedLinks(model: ModelDoc, table: TableDoc): RelatedLink[] {
  const out: RelatedLink[] = [];
  for (const other of allTables(model)) {
    for (const fk of other.foreign_keys) {
      if (fk.references.schema === table.schema_name && fk.references.table === table.name) {
        out.push({ table: other, fkColumns: [...fk.columns], refColumns: [...fk.references.columns] });
      }
    }
  }
  return out;
}

export function tableLabel(table: TableDoc): string {
  return `${table.schema_name}:${table.name}`;
}

export const NUMERIC_TYPES = new Set(["int8", "float8"]);
export const RANGE_TYPES = new Set(["int8", "float8", "date", "timestamptz"]);
export const CHIP_TYPES = new Set(["text", "boolean"]);
