/**
 * Data URL construction, mirroring GRAMMAR.md.
 *
 * Every URL the UI emits is built here, so conformance with the server
 * grammar is testable in one place: the corpus test freezes representative
 * outputs and the server's own parser test suite re-parses them.
 */

const SAFE = /^[A-Za-z0-9._~-]$/;

/** Percent-encode every byte outside the canonical atom-safe set. */
export function encodeAtom(value: string): string {
  const bytes = new TextEncoder().encode(value);
  let out = "";
  for (const b of bytes) {
    const c = String.fromCharCode(b);
    out += SAFE.test(c) ? c : "%" + b.toString(16).toUpperCase().padStart(2, "0");
  }
  return out;
}

/** Escape regex metacharacters so free-text search matches literally. */
export function regexEscape(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

export type FilterOp =
  | "=" | "lt" | "leq" | "gt" | "geq" | "null" | "regexp" | "ciregexp" | "ts";

export interface Filter {
  column: string; // "*" = all-text-columns wildcard
  op: FilterOp;
  operand?: string;
  alias?: string;
}

export interface SortKey {
  column: string;
  descending?: boolean;
}

function filterText(f: Filter): string {
  const col = f.column === "*" ? "*" : encodeAtom(f.column);
  const head = f.alias ? `${encodeAtom(f.alias)}:${col}` : col;
  const op = f.op === "=" ? "=" : `::${f.op}::`;
  if (f.op === "null") return head + op;
  return head + op + encodeAtom(f.operand ?? "");
}

export type Mapping = "entity" | "attribute" | "attributegroup" | "aggregate";

export class DataUrl {
  private segments: string[] = [];
  private projection: string | null = null;
  private sortKeys: SortKey[] = [];
  private afterValues: (string | null)[] | null = null;
  private limitValue: number | null = null;
  private acceptValue: "json" | "csv" | null = null;

  constructor(private catalog: string, private mapping: Mapping) {}

  table(name: string, schema?: string, alias?: string): this {
    const ref = schema ? `${encodeAtom(schema)}:${encodeAtom(name)}` : encodeAtom(name);
    this.segments.push(alias ? `${encodeAtom(alias)}:=${ref}` : ref);
    return this;
  }

  /** One conjunctive filter segment; several filters AND together. */
  filter(...fs: Filter[]): this {
    if (fs.length) this.segments.push(fs.map(filterText).join("&"));
    return this;
  }

  /** One disjunctive filter segment (facet chips OR together). */
  anyOf(...fs: Filter[]): this {
    if (fs.length) this.segments.push(fs.map(filterText).join(";"));
    return this;
  }

  /** Free-text search over all text columns, matched literally. */
  search(text: string): this {
    return this.filter({ column: "*", op: "ciregexp", operand: regexEscape(text) });
  }

  /** attribute/aggregate projection of plain columns. */
  project(...columns: string[]): this {
    this.projection = columns.map((c) => encodeAtom(c)).join(",");
    return this;
  }

  /** aggregate projection: named aggregate calls. */
  aggregate(...outs: { name: string; fn: string; column?: string }[]): this {
    this.projection = outs
      .map((o) => `${encodeAtom(o.name)}:=${o.fn}(${o.column ? encodeAtom(o.column) : "*"})`)
      .join(",");
    return this;
  }

  /** attributegroup projection: group keys, then aggregate part. */
  groupBy(groups: string[], outs: { name: string; fn: string; column?: string }[]): this {
    const g = groups.map((c) => encodeAtom(c)).join(",");
    const a = outs
      .map((o) => `${encodeAtom(o.name)}:=${o.fn}(${o.column ? encodeAtom(o.column) : "*"})`)
      .join(",");
    this.projection = a ? `${g};${a}` : g;
    return this;
  }

  sort(...keys: SortKey[]): this {
    this.sortKeys = keys;
    return this;
  }

  after(values: (string | null)[]): this {
    this.afterValues = values;
    return this;
  }

  limit(n: number): this {
    this.limitValue = n;
    return this;
  }

  accept(fmt: "json" | "csv"): this {
    this.acceptValue = fmt;
    return this;
  }

  build(): string {
    let url = `/ermrest/catalog/${encodeAtom(this.catalog)}/${this.mapping}`;
    for (const seg of this.segments) url += "/" + seg;
    if (this.projection !== null) url += "/" + this.projection;
    if (this.sortKeys.length) {
      const keys = this.sortKeys
        .map((k) => encodeAtom(k.column) + (k.descending ? "::desc::" : ""))
        .join(",");
      url += `@sort(${keys})`;
    }
    if (this.afterValues !== null) {
      const vals = this.afterValues
        .map((v) => (v === null ? "::null::" : encodeAtom(v)))
        .join(",");
      url += `@after(${vals})`;
    }
    const query: string[] = [];
    if (this.limitValue !== null) query.push(`limit=${this.limitValue}`);
    if (this.acceptValue !== null) query.push(`accept=${this.acceptValue}`);
    if (query.length) url += "?" + query.join("&");
    return url;
  }
}

/** Render a typed value as the text constant @after and filters expect. */
export function literalText(typename: string, value: unknown): string {
  if (typename === "boolean") return value ? "true" : "false";
  if (typename === "json") return JSON.stringify(value);
  return String(value);
}
