// Pure view-model: which boxes get drawn over the page image, and how.
//
// Values are the reviewable things, so every annotation gets a badged
// overlay colored by status. Keys only appear when they carry no
// reviewable value (dimmed, so unlinked structure stays visible) or
// when their annotation is selected (highlight). A doc with no
// annotations renders the bare image plus a notice.

import type { AnnotationView, DocPayload } from "./types.js";

export interface Overlay {
  kind: "value" | "key";
  annotationId: string | null;
  box: [number, number, number, number];
  badge: string;
  status: AnnotationView["status"] | null;
  dimmed: boolean;
  struck: boolean;
}

export function buildOverlays(doc: DocPayload): Overlay[] {
  if (doc.annotations.length === 0) return [];

  const overlays: Overlay[] = doc.annotations.map((ann) => ({
    kind: "value",
    annotationId: ann.id,
    box: ann.box,
    badge: ann.label,
    status: ann.status,
    dimmed: false,
    struck: ann.status === "rejected",
  }));

  const claimedKeys = new Set<number>();
  for (const ann of doc.annotations) {
    if (ann.source.key_entity !== null) claimedKeys.add(ann.source.key_entity);
  }
  for (const entity of doc.entities) {
    if (entity.label !== "key" || claimedKeys.has(entity.id)) continue;
    overlays.push({
      kind: "key",
      annotationId: null,
      box: entity.box,
      badge: entity.text,
      status: null,
      dimmed: true,
      struck: false,
    });
  }
  return overlays;
}

/** Key entity highlighted when its annotation is selected. */
export function selectedKeyBox(
  doc: DocPayload,
  selectedId: string | null,
): [number, number, number, number] | null {
  if (selectedId === null) return null;
  const ann = doc.annotations.find((a) => a.id === selectedId);
  if (!ann || ann.source.key_entity === null) return null;
  const key = doc.entities.find((e) => e.id === ann.source.key_entity);
  return key ? key.box : null;
}

export function reviewNotice(doc: DocPayload): string | null {
  return doc.annotations.length === 0 ? "nothing to review" : null;
}
