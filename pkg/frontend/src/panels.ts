// Pure DOM builders for the play view. Everything is rebuilt from service
// JSON — the world panel in particular is never patched from narration
// text, because only the structured state can be trusted.

import type { ScopeView, TurnReport } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function descriptionText(descriptions: string[]): string {
  return descriptions.join(" ");
}

export function worldPanel(scope: ScopeView): HTMLElement {
  const panel = el("div", "world-panel-content");

  const locationBlock = el("section", "panel-block location-block");
  locationBlock.appendChild(el("h3", "panel-heading", "Location"));
  locationBlock.appendChild(el("div", "location-name", scope.location.name));
  if (scope.location.descriptions.length) {
    locationBlock.appendChild(
      el("div", "location-descriptions muted", descriptionText(scope.location.descriptions)),
    );
  }
  panel.appendChild(locationBlock);

  const exitsBlock = el("section", "panel-block exits-block");
  exitsBlock.appendChild(el("h3", "panel-heading", "Exits"));
  if (scope.exits.length === 0) {
    exitsBlock.appendChild(el("div", "muted", "none"));
  } else {
    const list = el("ul", "exit-list");
    for (const exit of scope.exits) {
      const entry = el("li", exit.blocked ? "exit blocked" : "exit");
      entry.appendChild(el("span", "exit-name", exit.name));
      if (exit.blocked) {
        entry.appendChild(el("span", "badge badge-blocked", "blocked"));
      }
      list.appendChild(entry);
    }
    exitsBlock.appendChild(list);
  }
  panel.appendChild(exitsBlock);

  const itemsBlock = el("section", "panel-block items-block");
  itemsBlock.appendChild(el("h3", "panel-heading", "Items here"));
  if (scope.items.length === 0) {
    itemsBlock.appendChild(el("div", "muted", "nothing lies here"));
  } else {
    const list = el("ul", "item-list");
    for (const item of scope.items) {
      const entry = el("li", "item");
      entry.appendChild(el("span", "item-name", item.name));
      if (!item.gettable) {
        entry.appendChild(el("span", "badge badge-fixed", "fixed"));
      }
      if (item.descriptions.length) {
        entry.appendChild(el("div", "muted", descriptionText(item.descriptions)));
      }
      list.appendChild(entry);
    }
    itemsBlock.appendChild(list);
  }
  panel.appendChild(itemsBlock);

  const charactersBlock = el("section", "panel-block characters-block");
  charactersBlock.appendChild(el("h3", "panel-heading", "Characters"));
  for (const character of scope.characters) {
    const entry = el("div", character.is_player ? "character player" : "character");
    const title = el("div", "character-name", character.name);
    if (character.is_player) {
      title.appendChild(el("span", "badge badge-you", "you"));
    }
    entry.appendChild(title);
    const carrying = character.inventory.map((item) => item.name).join(", ");
    entry.appendChild(
      el("div", "inventory muted", carrying ? `carrying: ${carrying}` : "carrying nothing"),
    );
    charactersBlock.appendChild(entry);
  }
  panel.appendChild(charactersBlock);

  return panel;
}

export function narrationEntry(input: string, narration: string): HTMLElement {
  const entry = el("div", "log-entry");
  entry.appendChild(el("div", "log-input", `> ${input}`));
  entry.appendChild(el("div", "log-narration", narration));
  return entry;
}

export function errorEntry(message: string): HTMLElement {
  return el("div", "log-entry log-error", message);
}

export function noticeEntry(message: string): HTMLElement {
  return el("div", "log-entry log-notice", message);
}

export function diagnosticsEntry(report: TurnReport): HTMLElement {
  const entry = el("details", "turn-diagnostics");
  const rejected = report.rejected.length;
  const summary = el(
    "summary",
    rejected ? "diag-summary has-rejections" : "diag-summary",
    `turn ${report.turn}: ${report.applied.length} applied, ${rejected} rejected`,
  );
  entry.appendChild(summary);

  const sectionData: Array<[string, string[]]> = [
    ["parsed", report.parsed],
    ["applied", report.applied],
  ];
  for (const [label, lines] of sectionData) {
    const section = el("div", `diag-section diag-${label}`);
    section.appendChild(el("h4", "diag-heading", label));
    if (lines.length === 0) {
      section.appendChild(el("div", "muted", "none"));
    } else {
      for (const line of lines) {
        section.appendChild(el("code", "diag-line", line));
      }
    }
    entry.appendChild(section);
  }

  const rejections = el("div", "diag-section diag-rejected");
  rejections.appendChild(el("h4", "diag-heading", "rejected"));
  if (report.rejected.length === 0) {
    rejections.appendChild(el("div", "muted", "none"));
  } else {
    for (const rejection of report.rejected) {
      const row = el("div", "rejection");
      row.appendChild(el("span", "badge badge-rejected", rejection.reason));
      row.appendChild(el("code", "diag-line", rejection.line));
      row.appendChild(el("div", "muted rejection-detail", rejection.detail));
      rejections.appendChild(row);
    }
  }
  entry.appendChild(rejections);

  const raw = el("div", "diag-section diag-raw");
  raw.appendChild(el("h4", "diag-heading", "raw model output"));
  raw.appendChild(el("pre", "diag-raw-text", report.raw_output));
  entry.appendChild(raw);

  return entry;
}
