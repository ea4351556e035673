import type { TaxonomyEntry } from "./types.js";

export const EXPECTED_ACTIVITY_COUNT = 21;

// One unique key per activity, digits first for the most frequent rows.
const SHORTCUT_POOL = "1234567890qwertyuiopa";

export interface PaletteEntry {
	name: string;
	index: number;
	shortcut: string;
}

export class TaxonomyMismatchError extends Error {}

/**
 * Build the labeling palette from the server taxonomy.
 *
 * The palette is never hardcoded: the server list is the source of truth,
 * and anything other than the expected 21 contiguous entries is a contract
 * violation surfaced as a hard error.
 */
export function buildPalette(taxonomy: TaxonomyEntry[]): PaletteEntry[] {
	if (taxonomy.length !== EXPECTED_ACTIVITY_COUNT) {
		throw new TaxonomyMismatchError(
			`server taxonomy has ${taxonomy.length} entries, expected ${EXPECTED_ACTIVITY_COUNT}`,
		);
	}
	taxonomy.forEach((entry, position) => {
		if (entry.index !== position) {
			throw new TaxonomyMismatchError(
				`server taxonomy indices are not contiguous at position ${position}`,
			);
		}
	});
	const names = new Set(taxonomy.map((entry) => entry.name));
	if (names.size !== taxonomy.length) {
		throw new TaxonomyMismatchError("server taxonomy contains duplicate names");
	}
	return taxonomy.map((entry) => ({
		name: entry.name,
		index: entry.index,
		shortcut: SHORTCUT_POOL[entry.index]!,
	}));
}

export function entryForShortcut(
	palette: PaletteEntry[],
	key: string,
): PaletteEntry | undefined {
	return palette.find((entry) => entry.shortcut === key.toLowerCase());
}
