/**
 * Deterministic document colors. Links and chips for the same document must
 * keep the same color across sessions without asking the server, so the
 * color is a pure function of the document id.
 */

export const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc949",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
] as const;

/** FNV-1a 32-bit hash over UTF-16 code units. */
export function hashString(value: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < value.length; i += 1) {
    hash ^= value.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function docColor(docId: string): string {
  return PALETTE[hashString(docId) % PALETTE.length] ?? PALETTE[0];
}
