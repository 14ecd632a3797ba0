// View-driven DOM rendering. Every validity/inference fact shown here comes
// straight from the last fetched service view; nothing is computed locally.

import {
  AssumptionAction,
  AttributeView,
  PartView,
  ServiceClient,
  ServiceError,
  SessionView,
  Value,
} from "./api.js";

const UNSET = "";

export interface AppOptions {
  /** Receives the solution text and a file name when download is clicked. */
  saveFile?: (name: string, body: string) => void;
}

function defaultSaveFile(name: string, body: string): void {
  const blob = new Blob([body], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = name;
  link.click();
  URL.revokeObjectURL(url);
}

/** Targets of the assumptions blamed by the conflict, for red highlighting. */
function conflictTargets(view: SessionView): Set<string> {
  const targets = new Set<string>();
  if (!view.mus) return targets;
  const blamed = new Set(view.mus.assumptionIds);
  for (const assumption of view.assumptions) {
    if (blamed.has(assumption.id)) targets.add(assumption.target);
  }
  return targets;
}

export class App {
  private view: SessionView | null = null;
  private sessionId = "";
  private pending = false;

  constructor(
    private readonly client: ServiceClient,
    private readonly root: HTMLElement,
    private readonly options: AppOptions = {},
  ) {}

  async start(body: { model?: string; userInput?: string } = {}): Promise<void> {
    const created = await this.client.createSession(body);
    this.sessionId = created.sessionId;
    this.view = created.view;
    this.render();
    if (created.warnings.length) {
      this.showBanner(created.warnings.join("\n"));
    }
  }

  /** Serializes service calls: at most one request in flight. */
  private async submit(work: () => Promise<SessionView>): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    try {
      this.view = await work();
      this.render();
    } catch (error) {
      if (error instanceof ServiceError) {
        this.showBanner(error.message);
      } else {
        this.showBanner("network error – please retry");
      }
    } finally {
      this.pending = false;
    }
  }

  private postAssumption(action: AssumptionAction): Promise<void> {
    return this.submit(() =>
      this.client.postAssumption(this.sessionId, action),
    );
  }

  private showBanner(message: string): void {
    let banner = this.root.querySelector<HTMLElement>(".banner");
    if (!banner) {
      banner = document.createElement("div");
      banner.className = "banner";
      this.root.prepend(banner);
    }
    banner.textContent = message;
  }

  render(): void {
    const view = this.view;
    if (!view) return;
    this.root.textContent = "";
    if (!view.satisfiable) this.renderConflict(view);
    this.root.appendChild(this.renderAttributes(view));
    this.root.appendChild(this.renderParts(view));
    this.root.appendChild(this.renderControls(view));
  }

  private renderAttributes(view: SessionView): HTMLElement {
    const section = document.createElement("section");
    section.className = "attributes";
    const conflicts = conflictTargets(view);
    for (const attribute of view.attributes) {
      if (!attribute.shown) continue;
      section.appendChild(this.renderAttribute(attribute, conflicts));
    }
    return section;
  }

  private renderAttribute(
    attribute: AttributeView,
    conflicts: Set<string>,
  ): HTMLElement {
    const row = document.createElement("div");
    row.className = `attribute ${attribute.kind}`;
    row.dataset.target = attribute.id;
    if (conflicts.has(attribute.id)) row.classList.add("conflict");

    const label = document.createElement("label");
    label.textContent = attribute.name;
    label.htmlFor = attribute.id;
    row.appendChild(label);

    if (attribute.validValues === null && attribute.range) {
      row.appendChild(this.renderNumberInput(attribute));
    } else {
      row.appendChild(this.renderDropdown(attribute));
    }
    return row;
  }

  private renderDropdown(attribute: AttributeView): HTMLSelectElement {
    const select = document.createElement("select");
    select.id = attribute.id;
    const shownValue = attribute.selectedValue ?? attribute.inferredValue;
    if (attribute.selectedValue === null) {
      // inferred (or empty) state: dimmed, no user commitment yet
      if (attribute.inferredValue !== null) select.classList.add("inferred");
      const blank = document.createElement("option");
      blank.value = UNSET;
      blank.textContent = "";
      select.appendChild(blank);
    }
    const invalid = new Set(attribute.invalidValues ?? []);
    const values: Value[] = [...(attribute.validValues ?? [])];
    for (const value of invalid) values.push(value);
    if (shownValue !== null && !values.includes(shownValue)) {
      values.push(shownValue);
    }
    for (const value of values) {
      const option = document.createElement("option");
      option.value = String(value);
      option.textContent = String(value);
      // invalid options stay clickable so the user can ask "why not?"
      if (invalid.has(value)) option.classList.add("invalid");
      if (value === shownValue) option.selected = true;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      if (select.value === UNSET) {
        void this.postAssumption({ action: "unfix", target: attribute.id });
      } else {
        const value =
          attribute.kind === "integer" ? Number(select.value) : select.value;
        void this.postAssumption({
          action: "fix",
          target: attribute.id,
          value,
        });
      }
    });
    return select;
  }

  private renderNumberInput(attribute: AttributeView): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "number";
    input.id = attribute.id;
    const range = attribute.range!;
    input.min = String(range.lo);
    input.max = String(range.hi);
    const shownValue = attribute.selectedValue ?? attribute.inferredValue;
    if (shownValue !== null) input.value = String(shownValue);
    if (attribute.selectedValue === null && attribute.inferredValue !== null) {
      input.classList.add("inferred");
    }
    input.addEventListener("change", () => {
      if (input.value === UNSET) {
        void this.postAssumption({ action: "unfix", target: attribute.id });
        return;
      }
      const value = Number(input.value);
      if (!Number.isInteger(value) || value < range.lo || value > range.hi) {
        input.classList.add("invalid");
        return;
      }
      input.classList.remove("invalid");
      void this.postAssumption({ action: "fix", target: attribute.id, value });
    });
    return input;
  }

  private renderParts(view: SessionView): HTMLElement {
    const section = document.createElement("section");
    section.className = "parts";
    const included = new Set(
      view.assumptions
        .filter((assumption) => assumption.action === "include")
        .map((assumption) => assumption.target),
    );
    for (const part of view.parts) {
      if (!part.shown && !part.addable) continue;
      section.appendChild(this.renderPart(part, included.has(part.id)));
    }
    return section;
  }

  private renderPart(part: PartView, userAdded: boolean): HTMLElement {
    const row = document.createElement("div");
    row.className = "part";
    row.dataset.target = part.id;

    const label = document.createElement("span");
    label.textContent = part.name;
    row.appendChild(label);

    if (!part.shown && part.addable) {
      const add = document.createElement("button");
      add.className = "add";
      add.textContent = "+";
      add.title = `add ${part.name}`;
      add.addEventListener("click", () => {
        void this.postAssumption({ action: "include", target: part.id });
      });
      row.appendChild(add);
    } else if (part.removable && !part.forced && userAdded) {
      const remove = document.createElement("button");
      remove.className = "remove";
      remove.textContent = "×";
      remove.title = `remove ${part.name}`;
      remove.addEventListener("click", () => {
        void this.postAssumption({ action: "unfix", target: part.id });
      });
      row.appendChild(remove);
    }
    return row;
  }

  private renderConflict(view: SessionView): void {
    const window_ = document.createElement("div");
    window_.className = "explanation";
    const heading = document.createElement("strong");
    heading.textContent = "The current choices conflict:";
    window_.appendChild(heading);
    const list = document.createElement("ul");
    for (const message of view.mus?.messages ?? []) {
      const item = document.createElement("li");
      item.textContent = message;
      list.appendChild(item);
    }
    window_.appendChild(list);
    this.root.appendChild(window_);
  }

  private renderControls(view: SessionView): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "controls";

    const next = document.createElement("button");
    next.className = "browse-next";
    next.textContent = "Next solution";
    const reset = document.createElement("button");
    reset.className = "browse-reset";
    reset.textContent = "First solution";
    const download = document.createElement("button");
    download.className = "download";
    download.textContent = "Download solution";

    next.disabled = reset.disabled = download.disabled = !view.satisfiable;

    const browse = (direction: "next" | "reset") =>
      this.submit(async () => {
        const result = await this.client.browse(this.sessionId, direction);
        if (result.exhausted) this.showBanner("no further solutions");
        return result.view;
      });
    next.addEventListener("click", () => void browse("next"));
    reset.addEventListener("click", () => void browse("reset"));
    download.addEventListener("click", () => {
      void (async () => {
        try {
          const body = await this.client.fetchSolution(this.sessionId);
          (this.options.saveFile ?? defaultSaveFile)("solution.coom", body);
        } catch {
          this.showBanner("no solution to download");
        }
      })();
    });

    bar.append(next, reset, download);
    return bar;
  }
}
