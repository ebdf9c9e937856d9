// Browser entry point: wires ReviewView to the DOM. All document state
// flows through ReviewView; this file only translates events and paints.

import { ReviewApi } from "./api.js";
import { render } from "./render.js";
import { ReviewView } from "./view.js";

const api = new ReviewApi("");
const view = new ReviewView(api);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

function paint(): void {
  if (root) root.innerHTML = render(view.state);
}

async function run(work: Promise<unknown>): Promise<void> {
  try {
    await work;
  } catch (err) {
    view.state.banner = err instanceof Error ? err.message : String(err);
  }
  paint();
}

root.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement | null;
  const holder = target?.closest("[data-annotation]");
  const id = holder?.getAttribute("data-annotation");
  if (id) {
    try {
      view.select(id);
    } catch {
      return; // stale paint; next render fixes it
    }
    paint();
  }
});

document.addEventListener("keydown", (ev) => {
  if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLTextAreaElement) {
    return;
  }
  if (ev.key === "Enter" && view.state.draft) {
    ev.preventDefault();
    void run(view.submitDraft());
    return;
  }
  if (ev.key === "e") {
    const ann = view.selected();
    if (ann) {
      const next = window.prompt(`new text for ${ann.label}`, ann.text);
      if (next !== null) {
        view.draftTextEdit(next);
        void run(view.submitDraft());
      }
    }
    return;
  }
  void run(view.handleKey(ev.key));
});

void run(
  view.loadQueue().then(() => view.openCurrent()),
);
