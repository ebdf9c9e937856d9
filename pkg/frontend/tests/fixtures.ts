// A small fax-like document payload for unit tests: four key entities,
// three linked values, one key (entity 3) left unclaimed.

import type { AnnotationView, DocPayload } from "../src/types.js";

export function annotation(over: Partial<AnnotationView> & { id: string }): AnnotationView {
  return {
    label: "to",
    text: "George Baroody",
    box: [200, 100, 340, 120],
    status: "auto",
    confidence: 0.9,
    source: { key_entity: 0, value_entity: 4 },
    ...over,
  };
}

export function faxLikeDoc(): DocPayload {
  return {
    doc_id: "fax-mini",
    page: { width: 816, height: 1056 },
    image_url: "/api/docs/fax-mini/image",
    tokens: [],
    entities: [
      { id: 0, label: "key", token_indices: [0], text: "To:", box: [100, 100, 140, 120] },
      { id: 1, label: "key", token_indices: [1, 2], text: "Fax Number:", box: [100, 140, 190, 160] },
      { id: 2, label: "key", token_indices: [3], text: "Date:", box: [100, 180, 150, 200] },
      { id: 3, label: "key", token_indices: [4, 5], text: "Phone Number:", box: [100, 220, 210, 240] },
      { id: 4, label: "value", token_indices: [6, 7], text: "George Baroody", box: [200, 100, 340, 120] },
      { id: 5, label: "value", token_indices: [8, 9], text: "(336) 335-7392", box: [200, 140, 330, 160] },
      { id: 6, label: "value", token_indices: [10], text: "12/10/98", box: [200, 180, 280, 200] },
    ],
    links: {
      pairs: [[0, 4], [1, 5], [2, 6]],
      dropped_values: [],
      unlinked_keys: [3],
    },
    annotations: [
      annotation({ id: "fax-a0", label: "to", text: "George Baroody", box: [200, 100, 340, 120], source: { key_entity: 0, value_entity: 4 } }),
      annotation({ id: "fax-a1", label: "fax_number", text: "(336) 335-7392", box: [200, 140, 330, 160], source: { key_entity: 1, value_entity: 5 } }),
      annotation({ id: "fax-a2", label: "date", text: "12/10/98", box: [200, 180, 280, 200], source: { key_entity: 2, value_entity: 6 } }),
    ],
  };
}
