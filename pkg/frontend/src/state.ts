/**
 * Client-only view state. None of this is persisted server-side; the
 * workspace snapshot fetched from the server is the source of truth for
 * piles and evidence, and the ids held here must always point into the
 * latest snapshot (panes clear them when the target disappears).
 */

export interface HighlightFocus {
  kind: "span" | "link";
  index: number;
}

export interface ViewState {
  filter: string;
  groupBy: string | null;
  sortBy: string | null;
  direction: "asc" | "desc";
  pinnedDocId: string | null;
  selectedPileId: string | null;
  selectedEvidenceId: string | null;
  activeEntity: string | null;
  highlightFocus: HighlightFocus | null;
}

export function initialViewState(): ViewState {
  return {
    filter: "",
    groupBy: null,
    sortBy: null,
    direction: "asc",
    pinnedDocId: null,
    selectedPileId: null,
    selectedEvidenceId: null,
    activeEntity: null,
    highlightFocus: null,
  };
}
