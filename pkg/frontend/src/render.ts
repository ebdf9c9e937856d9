// Render ViewState to SVG/HTML strings. Pure functions, no DOM access;
// main.ts assigns the output to innerHTML.

import { buildOverlays, reviewNotice, selectedKeyBox, type Overlay } from "./overlays.js";
import type { ViewState } from "./view.js";
import type { AnnotationStatus, DocPayload } from "./types.js";

export const STATUS_COLORS: Record<AnnotationStatus, string> = {
  auto: "#c9a227",
  accepted: "#2e8b57",
  edited: "#1e6fb8",
  rejected: "#b0413e",
};

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function overlayRect(ov: Overlay, selected: boolean): string {
  const [x0, y0, x1, y1] = ov.box;
  const color = ov.kind === "key" ? "#888888" : STATUS_COLORS[ov.status ?? "auto"];
  const cls = [
    "overlay",
    ov.kind,
    ov.dimmed ? "dimmed" : "",
    selected ? "selected" : "",
  ].filter(Boolean).join(" ");
  const opacity = ov.dimmed ? 0.35 : 0.9;
  const id = ov.annotationId ? ` data-annotation="${esc(ov.annotationId)}"` : "";
  const rect =
    `<rect class="${cls}"${id} x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}"` +
    ` fill="none" stroke="${color}" stroke-width="${selected ? 3 : 1.5}" opacity="${opacity}"/>`;
  if (!ov.badge) return rect;
  const deco = ov.struck ? ' text-decoration="line-through"' : "";
  const badge =
    `<text class="badge"${id} x="${x0}" y="${Math.max(10, y0 - 4)}"` +
    ` fill="${color}" font-size="11"${deco}>${esc(ov.badge)}</text>`;
  return rect + badge;
}

export function renderOverlaySvg(state: ViewState): string {
  const doc = state.doc;
  if (!doc) return "";
  const overlays = buildOverlays(doc);
  const keyBox = selectedKeyBox(doc, state.selectedId);
  const parts: string[] = [];
  for (const ov of overlays) {
    parts.push(overlayRect(ov, ov.annotationId !== null && ov.annotationId === state.selectedId));
  }
  if (keyBox) {
    const [x0, y0, x1, y1] = keyBox;
    parts.push(
      `<rect class="linked-key" x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}"` +
      ` fill="none" stroke="#555555" stroke-width="2" stroke-dasharray="4 2"/>`,
    );
  }
  return parts.join("");
}

export function renderStage(state: ViewState): string {
  const doc = state.doc;
  if (!doc) return `<div class="empty">no document loaded</div>`;
  const { width, height } = doc.page;
  const transform =
    `translate(${state.panX}px, ${state.panY}px) scale(${state.zoom})`;
  const notice = reviewNotice(doc);
  const noticeHtml = notice ? `<div class="notice">${esc(notice)}</div>` : "";
  const page = doc.image_url
    ? `<img class="page" src="${esc(doc.image_url)}" width="${width}" height="${height}" alt="page"/>`
    : `<div class="page blank" style="width:${width}px;height:${height}px"></div>`;
  return (
    `<div class="stage" style="transform: ${transform}; transform-origin: 0 0;">` +
    page +
    `<svg class="overlays" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
    renderOverlaySvg(state) +
    `</svg></div>` +
    noticeHtml
  );
}

function rowFor(doc: DocPayload, annId: string, selected: boolean): string {
  const ann = doc.annotations.find((a) => a.id === annId);
  if (!ann) return "";
  const color = STATUS_COLORS[ann.status];
  const label = ann.status === "rejected" ? `<s>${esc(ann.label)}</s>` : esc(ann.label);
  return (
    `<tr class="ann${selected ? " selected" : ""}" data-annotation="${esc(ann.id)}">` +
    `<td class="status" style="color:${color}">${esc(ann.status)}</td>` +
    `<td class="label">${label}</td>` +
    `<td class="text">${esc(ann.text)}</td>` +
    `<td class="conf">${ann.confidence === null ? "" : ann.confidence.toFixed(2)}</td>` +
    `</tr>`
  );
}

export function renderSidebar(state: ViewState): string {
  const doc = state.doc;
  if (!doc) return "";
  const rows = doc.annotations
    .map((a) => rowFor(doc, a.id, a.id === state.selectedId))
    .join("");
  const queue = state.queue.length
    ? `<div class="queue">document ${state.queuePos + 1} of ${state.queue.length}</div>`
    : "";
  return (
    `<h2>${esc(doc.doc_id)}</h2>${queue}` +
    `<table class="annotations"><thead><tr>` +
    `<th>status</th><th>label</th><th>text</th><th>conf</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderDraftPanel(state: ViewState): string {
  if (!state.draft) return "";
  const d = state.draft;
  const err = state.draftError
    ? `<div class="draft-error">${esc(state.draftError)}</div>`
    : "";
  return (
    `<div class="draft">pending ${esc(d.kind)}` +
    (d.annotationId ? ` on ${esc(d.annotationId)}` : "") +
    ` (enter to commit, esc to discard)${err}</div>`
  );
}

export function renderBanner(state: ViewState): string {
  return state.banner ? `<div class="banner">${esc(state.banner)}</div>` : "";
}

export function render(state: ViewState): string {
  return (
    renderBanner(state) +
    `<div class="layout"><div class="viewport">${renderStage(state)}</div>` +
    `<div class="sidebar">${renderSidebar(state)}${renderDraftPanel(state)}</div></div>`
  );
}
