export interface TaxonomyEntry {
	name: string;
	index: number;
}

export interface ImageItem {
	image_id: string;
	owner_user_id: string;
	timestamp: string;
	thumbnail: string | null;
	label: string | null;
	tags: string[];
}

export interface ImagePage {
	items: ImageItem[];
	total: number;
	page: number;
	size: number;
}

export interface AnnotationResponse {
	image_id: string;
	owner_user_id: string;
	label: string | null;
	tags: string[];
	/** ISO timestamp of the server write; orderable lexicographically. */
	updated_at: string | null;
	updated_by: string | null;
}

/** Minimal fetch-compatible signature so tests can inject a mock server. */
export type FetchLike = (
	url: string,
	init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{
	ok: boolean;
	status: number;
	json(): Promise<unknown>;
	text(): Promise<string>;
}>;
