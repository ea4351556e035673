import type {
	AnnotationResponse,
	FetchLike,
	ImagePage,
	TaxonomyEntry,
} from "./types.js";

export class ApiError extends Error {
	constructor(
		readonly status: number,
		message: string,
	) {
		super(message);
	}
}

/** Thin client for the annotation-service HTTP API. */
export class ApiClient {
	private token: string | null = null;

	constructor(
		private readonly baseUrl: string = "",
		private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
	) {}

	setToken(token: string): void {
		this.token = token;
	}

	private headers(): Record<string, string> {
		const headers: Record<string, string> = { "Content-Type": "application/json" };
		if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
		return headers;
	}

	private async request<T>(
		method: string,
		path: string,
		body?: unknown,
		extraHeaders?: Record<string, string>,
	): Promise<T> {
		const response = await this.fetchFn(this.baseUrl + path, {
			method,
			headers: { ...this.headers(), ...extraHeaders },
			body: body === undefined ? undefined : JSON.stringify(body),
		});
		if (!response.ok) {
			let detail = `${method} ${path} failed with ${response.status}`;
			try {
				const payload = (await response.json()) as { detail?: string };
				if (payload?.detail) detail = payload.detail;
			} catch {
				// non-JSON error body; keep the generic message
			}
			throw new ApiError(response.status, detail);
		}
		return (await response.json()) as T;
	}

	async login(userId: string, serviceSecret: string): Promise<string> {
		const session = await this.request<{ token: string }>(
			"POST",
			"/sessions",
			{ user_id: userId },
			{ "X-Service-Secret": serviceSecret },
		);
		this.token = session.token;
		return session.token;
	}

	taxonomy(): Promise<TaxonomyEntry[]> {
		return this.request<TaxonomyEntry[]>("GET", "/taxonomy");
	}

	listImages(owner: string, page: number, size: number): Promise<ImagePage> {
		const params = new URLSearchParams({ page: String(page), size: String(size) });
		return this.request<ImagePage>("GET", `/collections/${owner}/images?${params}`);
	}

	setLabel(imageId: string, label: string): Promise<AnnotationResponse> {
		return this.request<AnnotationResponse>("PUT", `/images/${imageId}/label`, { label });
	}

	addTag(imageId: string, tag: string): Promise<AnnotationResponse> {
		return this.request<AnnotationResponse>("POST", `/images/${imageId}/tags`, { tag });
	}

	removeTag(imageId: string, tag: string): Promise<AnnotationResponse> {
		return this.request<AnnotationResponse>(
			"DELETE",
			`/images/${imageId}/tags/${encodeURIComponent(tag)}`,
		);
	}

	annotation(imageId: string): Promise<AnnotationResponse> {
		return this.request<AnnotationResponse>("GET", `/images/${imageId}/annotation`);
	}
}
