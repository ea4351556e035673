import { ApiClient } from "./api.js";
import {
	applyFilter,
	goToPage,
	initialGrid,
	pageCount,
	toggleSelection,
	type GridFilter,
	type GridViewState,
} from "./grid.js";
import { buildPalette, entryForShortcut, type PaletteEntry } from "./palette.js";
import { BadgeReconciler, OfflineQueue } from "./reconcile.js";
import type { ImageItem } from "./types.js";

const api = new ApiClient("");
const reconciler = new BadgeReconciler(api);
const offline = new OfflineQueue(reconciler);

let palette: PaletteEntry[] = [];
let grid: GridViewState | null = null;
let pageItems: ImageItem[] = [];
let total = 0;

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) throw new Error(`missing element #${id}`);
	return node as T;
}

function banner(message: string, isError = false): void {
	const box = el<HTMLDivElement>("banner");
	box.textContent = message;
	box.className = isError ? "banner error" : "banner";
	box.hidden = message === "";
}

async function login(): Promise<void> {
	const owner = el<HTMLInputElement>("owner").value.trim();
	const user = el<HTMLInputElement>("user").value.trim();
	const secret = el<HTMLInputElement>("secret").value;
	try {
		await api.login(user, secret);
		palette = buildPalette(await api.taxonomy());
		grid = initialGrid(owner, 48);
		renderPalette();
		await loadPage();
		banner("");
	} catch (error) {
		banner(error instanceof Error ? error.message : String(error), true);
	}
}

async function loadPage(): Promise<void> {
	if (!grid) return;
	try {
		const page = await api.listImages(grid.owner, grid.page, grid.pageSize);
		pageItems = page.items;
		total = page.total;
		for (const item of pageItems) reconciler.prime(item.image_id, item.label);
		goToPage(grid, grid.page, pageItems.map((item) => item.image_id));
		renderGrid();
	} catch (error) {
		pageItems = [];
		renderGrid();
		banner(error instanceof Error ? error.message : String(error), true);
	}
}

function renderPalette(): void {
	const box = el<HTMLDivElement>("palette");
	box.replaceChildren(
		...palette.map((entry) => {
			const button = document.createElement("button");
			button.textContent = `${entry.shortcut} ${entry.name}`;
			button.addEventListener("click", () => void applyActivity(entry.name));
			return button;
		}),
	);
}

function currentFilter(): GridFilter {
	const value = el<HTMLSelectElement>("filter").value;
	if (value === "labeled" || value === "unlabeled") return { kind: value };
	if (value.startsWith("activity:")) {
		return { kind: "activity", name: value.slice("activity:".length) };
	}
	return { kind: "all" };
}

function renderGrid(): void {
	if (!grid) return;
	const container = el<HTMLDivElement>("grid");
	const visible = applyFilter(pageItems, currentFilter());
	container.replaceChildren(
		...visible.map((item) => {
			const card = document.createElement("div");
			card.className = "card";
			if (grid!.selection.has(item.image_id)) card.classList.add("selected");
			const img = document.createElement("img");
			img.src = `/images/${item.image_id}/thumbnail`;
			img.alt = item.image_id;
			img.loading = "lazy";
			const badge = document.createElement("span");
			const state = reconciler.badge(item.image_id);
			badge.className = `badge ${state.status}`;
			badge.textContent = offline.isQueued(item.image_id)
				? "queued"
				: (state.label ?? "unlabeled");
			if (state.status === "error") {
				const retry = document.createElement("button");
				retry.textContent = "retry";
				retry.addEventListener("click", (event) => {
					event.stopPropagation();
					void reconciler.retry(item.image_id).then(renderGrid);
				});
				card.append(retry);
			}
			card.append(img, badge);
			card.addEventListener("click", () => {
				toggleSelection(grid!, item.image_id, pageItems.map((i) => i.image_id));
				renderGrid();
			});
			return card;
		}),
	);
	el<HTMLSpanElement>("status").textContent =
		`page ${grid.page}/${pageCount(total, grid.pageSize)} - ${total} images - ` +
		`${grid.selection.size} selected${offline.isOnline() ? "" : " - OFFLINE"}`;
}

async function applyActivity(name: string): Promise<void> {
	if (!grid || grid.selection.size === 0) return;
	await offline.apply([...grid.selection], name);
	renderGrid();
}

function bindEvents(): void {
	el<HTMLButtonElement>("login").addEventListener("click", () => void login());
	el<HTMLSelectElement>("filter").addEventListener("change", renderGrid);
	el<HTMLButtonElement>("prev").addEventListener("click", () => {
		if (grid && grid.page > 1) {
			grid.page -= 1;
			void loadPage();
		}
	});
	el<HTMLButtonElement>("next").addEventListener("click", () => {
		if (grid && grid.page < pageCount(total, grid.pageSize)) {
			grid.page += 1;
			void loadPage();
		}
	});
	document.addEventListener("keydown", (event) => {
		if (event.target instanceof HTMLInputElement) return;
		const entry = entryForShortcut(palette, event.key);
		if (entry) void applyActivity(entry.name);
	});
	window.addEventListener("offline", () => {
		offline.goOffline();
		renderGrid();
	});
	window.addEventListener("online", () => {
		void offline.goOnline().then(renderGrid);
	});
	reconciler.onBadgeChange(() => renderGrid());
}

document.addEventListener("DOMContentLoaded", bindEvents);
