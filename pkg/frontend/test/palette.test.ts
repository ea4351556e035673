import { describe, expect, it } from "vitest";

import {
	buildPalette,
	entryForShortcut,
	EXPECTED_ACTIVITY_COUNT,
	TaxonomyMismatchError,
} from "../src/palette.js";
import type { TaxonomyEntry } from "../src/types.js";

const SERVER_TAXONOMY: TaxonomyEntry[] = [
	"Public Transport", "Driving", "Walking outdoor", "Walking indoor", "Biking",
	"Drinking together", "Drinking/eating alone", "Eating together", "Socializing",
	"Attending a seminar", "Meeting", "Reading", "TV", "Cleaning and chores",
	"Working", "Cooking", "Shopping", "Talking", "Resting", "Mobile", "Plane",
].map((name, index) => ({ name, index }));

describe("label palette", () => {
	it("mirrors the served taxonomy exactly, in order", () => {
		const palette = buildPalette(SERVER_TAXONOMY);
		expect(palette.length).toBe(EXPECTED_ACTIVITY_COUNT);
		expect(palette.map((e) => e.name)).toEqual(SERVER_TAXONOMY.map((e) => e.name));
		expect(palette.map((e) => e.index)).toEqual(SERVER_TAXONOMY.map((e) => e.index));
	});

	it("assigns a unique shortcut to every activity", () => {
		const palette = buildPalette(SERVER_TAXONOMY);
		const shortcuts = palette.map((e) => e.shortcut);
		expect(new Set(shortcuts).size).toBe(EXPECTED_ACTIVITY_COUNT);
		expect(shortcuts.every((s) => s.length === 1)).toBe(true);
	});

	it("rejects a taxonomy that is not exactly 21 entries", () => {
		expect(() => buildPalette(SERVER_TAXONOMY.slice(0, 20))).toThrow(TaxonomyMismatchError);
		const extra = [...SERVER_TAXONOMY, { name: "Napping", index: 21 }];
		expect(() => buildPalette(extra)).toThrow(TaxonomyMismatchError);
	});

	it("rejects non-contiguous indices and duplicate names", () => {
		const shuffled = [...SERVER_TAXONOMY];
		shuffled[3] = { ...shuffled[3]!, index: 9 };
		expect(() => buildPalette(shuffled)).toThrow(TaxonomyMismatchError);
		const duplicated = SERVER_TAXONOMY.map((entry, i) =>
			i === 5 ? { ...entry, name: "Driving" } : entry,
		);
		expect(() => buildPalette(duplicated)).toThrow(TaxonomyMismatchError);
	});

	it("resolves shortcuts case-insensitively", () => {
		const palette = buildPalette(SERVER_TAXONOMY);
		expect(entryForShortcut(palette, "1")?.name).toBe("Public Transport");
		expect(entryForShortcut(palette, "Q")?.name).toBe(palette[10]!.name);
		expect(entryForShortcut(palette, "z")).toBeUndefined();
	});
});
