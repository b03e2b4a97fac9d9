/** Deterministic HTML renderers: same view model in, same markup out.
 *
 * No DOM access here; the controller swaps the returned strings into the
 * page.  Keeping these pure is what lets the tests assert that a reload
 * reproduces the exact same markup.
 */

import type { EditCard, ProvenanceLine, StudioViewModel } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function renderProvenance(lines: ProvenanceLine[]): string {
  const rows = lines
    .map(
      (line) =>
        `<tr><td class="stage">${escapeHtml(line.stage)}</td>` +
        `<td>${line.backendId === null ? "local" : escapeHtml(line.backendId)}</td>` +
        `<td class="seed">${line.seed === null ? "-" : line.seed}</td></tr>`,
    )
    .join("");
  return (
    '<table class="provenance"><thead>' +
    "<tr><th>stage</th><th>backend</th><th>seed</th></tr>" +
    `</thead><tbody>${rows}</tbody></table>`
  );
}

export function renderCard(card: EditCard): string {
  const flags: string[] = [];
  if (card.twoStage) {
    flags.push("two-stage");
  }
  if (card.injectedErrorDeg !== 0) {
    flags.push(`injected error ${card.injectedErrorDeg}°`);
  }
  const failure = card.failure
    ? `<p class="failure">failed at <strong>${escapeHtml(card.failure.stage)}</strong>: ` +
      `${escapeHtml(card.failure.errorType)}: ${escapeHtml(card.failure.detail)}</p>`
    : "";
  return (
    `<article class="card status-${card.status}" data-index="${card.index}">` +
    `<header><span class="index">#${card.index}</span>` +
    `<span class="instruction">${escapeHtml(card.instruction)}</span>` +
    `<span class="badge">${card.status}</span></header>` +
    `<img class="output" alt="edit ${card.index} output" src="${card.outputUrl}">` +
    `<p class="meta">seed ${card.seed}` +
    (flags.length ? ` · ${escapeHtml(flags.join(", "))}` : "") +
    ` · ${escapeHtml(card.requested)}</p>` +
    failure +
    renderProvenance(card.provenance) +
    "</article>"
  );
}

export function renderCards(cards: EditCard[]): string {
  if (cards.length === 0) {
    return '<p class="empty">No edits yet. Move a slider to make one.</p>';
  }
  return cards.map(renderCard).join("");
}

export function renderSessionHeader(vm: StudioViewModel): string {
  return (
    '<div class="session-meta">' +
    `<span class="session-id">session ${escapeHtml(vm.sessionId)}</span>` +
    `<span>created ${escapeHtml(vm.created)}</span>` +
    `<span>updated ${escapeHtml(vm.updated)}</span>` +
    (vm.hasReference ? "<span>reference attached</span>" : "") +
    "</div>"
  );
}

/** Whole-studio markup for one session state. */
export function renderStudio(vm: StudioViewModel): string {
  return (
    renderSessionHeader(vm) +
    '<div class="images">' +
    `<figure><img alt="source" src="${vm.sourceUrl}"><figcaption>source</figcaption></figure>` +
    (vm.referenceUrl
      ? `<figure><img alt="reference" src="${vm.referenceUrl}"><figcaption>reference</figcaption></figure>`
      : "") +
    `<figure><img alt="current" src="${vm.currentUrl}"><figcaption>current</figcaption></figure>` +
    "</div>" +
    `<section class="cards">${renderCards(vm.cards)}</section>`
  );
}
