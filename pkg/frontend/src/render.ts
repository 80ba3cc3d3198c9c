/**
 * HTML renderers: pure string builders over controller state, so tests can
 * assert on markup without a browser. app.ts wires them to the DOM.
 */

import { Row } from "./api.js";
import { ColumnDoc, TableDoc, tableLabel } from "./display.js";
import {
  DetailResult, EditState, ListingResult, ListingState, RelatedSection,
} from "./controllers.js";
import { Facet } from "./facets.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function cellText(column: ColumnDoc, value: unknown): string {
  if (value === null || value === undefined) return "";
  if (column.type === "json") return JSON.stringify(value);
  if (column.type === "boolean") return value ? "true" : "false";
  return String(value);
}

function cell(column: ColumnDoc, value: unknown): string {
  if (value === null || value === undefined) {
    return '<td class="null">&empty;</td>';
  }
  return `<td>${escapeHtml(cellText(column, value))}</td>`;
}

export function renderNav(tables: TableDoc[], active: TableDoc | null): string {
  const items = tables.map((t) => {
    const cls = active && tableLabel(t) === tableLabel(active) ? ' class="active"' : "";
    return `<li${cls}><a href="#/t/${encodeURIComponent(t.schema_name)}/` +
      `${encodeURIComponent(t.name)}">${escapeHtml(tableLabel(t))}</a></li>`;
  });
  return `<ul class="nav">${items.join("")}</ul>`;
}

function renderFacet(facet: Facet): string {
  if (facet.kind === "chips") {
    const chips = facet.chips.map((c, i) => {
      const label = c.value === null ? "&empty;" : escapeHtml(c.value);
      const cls = c.selected ? "chip selected" : "chip";
      return `<button class="${cls}" data-facet="${escapeHtml(facet.column)}"` +
        ` data-chip="${i}">${label} <span class="count">${c.count}</span></button>`;
    });
    return `<div class="facet"><h4>${escapeHtml(facet.column)}</h4>${chips.join("")}</div>`;
  }
  return `<div class="facet"><h4>${escapeHtml(facet.column)}</h4>` +
    `<input class="range-low" data-facet="${escapeHtml(facet.column)}"` +
    ` placeholder="min" value="${escapeHtml(facet.low)}">` +
    `<input class="range-high" data-facet="${escapeHtml(facet.column)}"` +
    ` placeholder="max" value="${escapeHtml(facet.high)}"></div>`;
}

export function renderListing(table: TableDoc, state: ListingState,
                              result: ListingResult): string {
  const heads = result.columns.map((c) => {
    const sorted = state.sort.find((s) => s.column === c.name);
    const marker = sorted ? (sorted.descending ? " ↓" : " ↑") : "";
    return `<th><a href="#" data-sort="${escapeHtml(c.name)}">` +
      `${escapeHtml(c.name)}${marker}</a></th>`;
  });
  const body = result.rows.length
    ? result.rows.map((row) =>
        `<tr data-row="${escapeHtml(JSON.stringify(rowRef(table, row)))}">` +
        result.columns.map((c) => cell(c, row[c.name])).join("") + "</tr>").join("")
    : `<tr><td class="zero-state" colspan="${result.columns.length}">no rows</td></tr>`;
  const pager =
    `<div class="pager">` +
    `<button data-page="prev"${state.pageStack.length ? "" : " disabled"}>previous</button>` +
    `<button data-page="next"${result.nextAfter ? "" : " disabled"}>next</button>` +
    `</div>`;
  return `<section class="listing">
<h2>${escapeHtml(tableLabel(table))}</h2>
<input class="search" placeholder="search" value="${escapeHtml(state.search)}">
<div class="facets">${state.facets.map(renderFacet).join("")}</div>
<table><thead><tr>${heads.join("")}</tr></thead><tbody>${body}</tbody></table>
${pager}
</section>`;
}

function rowRef(table: TableDoc, row: Row): Record<string, unknown> {
  const key = table.keys[0];
  if (!key) return {};
  return Object.fromEntries(key.columns.map((k) => [k, row[k] ?? null]));
}

export function renderRelated(section: RelatedSection): string {
  const label = tableLabel(section.link.table);
  const heads = section.columns.map((c) => `<th>${escapeHtml(c.name)}</th>`).join("");
  const rows = section.rows.map((row) =>
    "<tr>" + section.columns.map((c) => cell(c, row[c.name])).join("") + "</tr>").join("");
  return `<section class="related" data-table="${escapeHtml(label)}">
<h3>${escapeHtml(label)} <span class="count">${section.count}</span></h3>
<table><thead><tr>${heads}</tr></thead><tbody>${rows}</tbody></table>
</section>`;
}

export function renderDetail(table: TableDoc, result: DetailResult): string {
  if (result.row === null) {
    return `<section class="detail missing"><h2>${escapeHtml(tableLabel(table))}</h2>
<p class="zero-state">this record does not exist (the URL now denotes an empty set)</p>
</section>`;
  }
  const row = result.row;
  const items = result.columns.map((c) =>
    `<dt>${escapeHtml(c.name)}</dt><dd>${escapeHtml(cellText(c, row[c.name])) || "&empty;"}</dd>`);
  return `<section class="detail">
<h2>${escapeHtml(tableLabel(table))}</h2>
<dl>${items.join("")}</dl>
<button class="edit">edit</button>
${result.related.map(renderRelated).join("\n")}
</section>`;
}

const INPUT_KIND: Record<string, string> = {
  int8: "number",
  float8: "number",
  date: "date",
};

export function renderEditForm(table: TableDoc, state: EditState): string {
  const banner = state.conflict
    ? `<div class="conflict-banner">someone else changed this record since you ` +
      `loaded it (the server answered 412) <button class="reload">reload</button></div>`
    : "";
  const saveError = state.saveError
    ? `<div class="save-error">${escapeHtml(state.saveError)}</div>` : "";
  const saved = state.saved ? `<div class="saved-toast">saved</div>` : "";
  const fields = state.fields.map((f, i) => {
    const col = f.column;
    const required = col.nullable ? "" : " required";
    const err = f.error ? `<span class="field-error">${escapeHtml(f.error)}</span>` : "";
    let input: string;
    if (col.type === "boolean") {
      const sel = (v: string) => (f.text === v ? " selected" : "");
      input = `<select data-field="${i}"><option value=""${sel("")}></option>` +
        `<option value="true"${sel("true")}>true</option>` +
        `<option value="false"${sel("false")}>false</option></select>`;
    } else if (col.type === "json") {
      input = `<textarea data-field="${i}">${escapeHtml(f.text)}</textarea>`;
    } else {
      const kind = INPUT_KIND[col.type] ?? "text";
      const step = col.type === "float8" ? ' step="any"' : "";
      input = `<input type="${kind}"${step} data-field="${i}"` +
        ` value="${escapeHtml(f.text)}"${required}>`;
    }
    const nullToggle = col.nullable
      ? `<label class="null-toggle"><input type="checkbox" data-null="${i}"` +
        `${f.setNull ? " checked" : ""}> null</label>`
      : "";
    return `<div class="field" data-type="${col.type}">
<label>${escapeHtml(col.name)}<span class="type">${col.type}${col.nullable ? "" : " (required)"}</span></label>
${input}${nullToggle}${err}
</div>`;
  });
  return `<form class="edit-form" data-etag="${escapeHtml(state.etag ?? "")}">
<h2>edit ${escapeHtml(tableLabel(table))}</h2>
${banner}${saveError}${saved}
${fields.join("\n")}
<button type="submit">save</button>
</form>`;
}
