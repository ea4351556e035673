import type { ImageItem } from "./types.js";

export type GridFilter =
	| { kind: "all" }
	| { kind: "labeled" }
	| { kind: "unlabeled" }
	| { kind: "activity"; name: string };

export interface GridViewState {
	owner: string;
	page: number;
	pageSize: number;
	filter: GridFilter;
	/** Selected ids; invariant: subset of current page ids union pinned. */
	selection: Set<string>;
	/** Selections kept alive across page changes. */
	pinned: Set<string>;
}

export function initialGrid(owner: string, pageSize = 50): GridViewState {
	return {
		owner,
		page: 1,
		pageSize,
		filter: { kind: "all" },
		selection: new Set(),
		pinned: new Set(),
	};
}

export function pageCount(total: number, pageSize: number): number {
	return Math.max(1, Math.ceil(total / pageSize));
}

export function matchesFilter(item: ImageItem, filter: GridFilter): boolean {
	switch (filter.kind) {
		case "all":
			return true;
		case "labeled":
			return item.label !== null;
		case "unlabeled":
			return item.label === null;
		case "activity":
			return item.label === filter.name;
	}
}

export function applyFilter(items: ImageItem[], filter: GridFilter): ImageItem[] {
	return items.filter((item) => matchesFilter(item, filter));
}

export function toggleSelection(state: GridViewState, id: string, pageIds: string[]): void {
	if (state.selection.has(id)) {
		state.selection.delete(id);
		state.pinned.delete(id);
	} else if (pageIds.includes(id) || state.pinned.has(id)) {
		state.selection.add(id);
	}
}

export function pinSelection(state: GridViewState): void {
	for (const id of state.selection) state.pinned.add(id);
}

/** Move to a page, dropping selections that are neither visible nor pinned. */
export function goToPage(state: GridViewState, page: number, pageIds: string[]): void {
	if (page < 1) throw new RangeError(`page must be >= 1, got ${page}`);
	state.page = page;
	for (const id of [...state.selection]) {
		if (!pageIds.includes(id) && !state.pinned.has(id)) state.selection.delete(id);
	}
}

export function selectionInvariantHolds(state: GridViewState, pageIds: string[]): boolean {
	for (const id of state.selection) {
		if (!pageIds.includes(id) && !state.pinned.has(id)) return false;
	}
	return true;
}
