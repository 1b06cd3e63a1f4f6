/** DOM construction for result panels. Pure functions of their inputs so
 * tests can assert on structure and order. */

import type { ConceptDetails } from "./api.js";
import type { CandidateView, PanelModel } from "./events.js";

export interface PanelHandlers {
  onAccept(name: string, candidate: CandidateView): void;
  onExpand(candidate: CandidateView, row: HTMLTableRowElement): void;
  onRetry(oldName: string, newName: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function scoreLabel(candidate: CandidateView): string {
  return candidate.scoreKind === "vector"
    ? candidate.score.toFixed(4)
    : candidate.score.toFixed(2);
}

export function renderPanel(
  doc: Document,
  panel: PanelModel,
  handlers: PanelHandlers,
  acceptedConceptId?: number,
): HTMLElement {
  const section = el(doc, "section", "result-panel");
  section.dataset.name = panel.name;

  const heading = el(doc, "h3", undefined, panel.name);
  const elapsed = el(doc, "span", "elapsed", ` ${panel.elapsedMs.toFixed(0)} ms`);
  heading.appendChild(elapsed);
  section.appendChild(heading);

  if (panel.reply !== null) {
    const reply = el(doc, "p", "reply", "suggested name: ");
    reply.appendChild(el(doc, "strong", undefined, panel.reply));
    section.appendChild(reply);
  }
  if (panel.error) {
    section.appendChild(el(doc, "p", "error", panel.error));
    return section;
  }
  if (panel.warning) {
    section.appendChild(el(doc, "p", "warning", `warning: ${panel.warning}`));
  }

  if (panel.noMatch) {
    const noMatch = el(doc, "div", "no-match");
    noMatch.appendChild(el(doc, "span", undefined, "no match - edit and retry: "));
    const input = el(doc, "input", "retry-input");
    input.type = "text";
    input.value = panel.name;
    const retry = el(doc, "button", "retry", "Retry");
    retry.addEventListener("click", () => {
      if (input.value.trim()) handlers.onRetry(panel.name, input.value.trim());
    });
    noMatch.appendChild(input);
    noMatch.appendChild(retry);
    section.appendChild(noMatch);
    return section;
  }

  const table = el(doc, "table", "candidates");
  const thead = el(doc, "thead");
  const headRow = el(doc, "tr");
  for (const label of ["concept", "id", "vocabulary", "score", "", ""]) {
    headRow.appendChild(el(doc, "th", undefined, label));
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = el(doc, "tbody");
  for (const candidate of panel.candidates) {
    const row = el(doc, "tr", "candidate");
    row.dataset.conceptId = String(candidate.conceptId);
    row.appendChild(el(doc, "td", "concept-name", candidate.conceptName));
    row.appendChild(el(doc, "td", "concept-id", String(candidate.conceptId)));
    row.appendChild(el(doc, "td", "vocabulary", candidate.vocabularyId ?? ""));
    row.appendChild(el(doc, "td", `score score-${candidate.scoreKind}`, scoreLabel(candidate)));

    const detailsCell = el(doc, "td");
    const detailsButton = el(doc, "button", "details", "details");
    detailsButton.addEventListener("click", () => handlers.onExpand(candidate, row));
    detailsCell.appendChild(detailsButton);
    row.appendChild(detailsCell);

    const acceptCell = el(doc, "td");
    const acceptButton = el(doc, "button", "accept", "Accept");
    if (acceptedConceptId === candidate.conceptId) {
      row.classList.add("accepted");
      acceptButton.textContent = "Accepted";
    }
    acceptButton.addEventListener("click", () => handlers.onAccept(panel.name, candidate));
    acceptCell.appendChild(acceptButton);
    row.appendChild(acceptCell);

    tbody.appendChild(row);
  }
  table.appendChild(tbody);
  section.appendChild(table);
  return section;
}

/** Detail lists inserted beneath a candidate row on expansion. */
export function renderDetails(doc: Document, details: ConceptDetails): HTMLElement {
  const box = el(doc, "div", "concept-details");
  box.appendChild(
    el(
      doc,
      "p",
      "concept-code",
      `${details.concept.vocabulary_id} code ${details.concept.concept_code}`,
    ),
  );
  const lists: [string, string[]][] = [
    ["synonyms", details.synonyms],
    [
      "ancestors",
      details.ancestors.map((a) => `${a.ancestor_concept_id} (+${a.levels_of_separation})`),
    ],
    [
      "relationships",
      details.relationships.map((r) => `${r.relationship_id} -> ${r.related_concept_id}`),
    ],
  ];
  for (const [label, values] of lists) {
    const paragraph = el(doc, "p", label);
    paragraph.appendChild(el(doc, "strong", undefined, `${label}: `));
    paragraph.appendChild(
      doc.createTextNode(values.length > 0 ? values.join("; ") : "none"),
    );
    box.appendChild(paragraph);
  }
  return box;
}
