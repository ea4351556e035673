import type { FetchLike } from "../src/types.js";

interface PendingRequest {
	imageId: string;
	label: string;
	settle: (response: MockResponse) => void;
}

interface MockResponse {
	ok: boolean;
	status: number;
	json(): Promise<unknown>;
	text(): Promise<string>;
}

function jsonResponse(status: number, payload: unknown): MockResponse {
	return {
		ok: status >= 200 && status < 300,
		status,
		json: async () => payload,
		text: async () => JSON.stringify(payload),
	};
}

/**
 * Scripted annotation server: label writes park as pending requests the
 * test settles explicitly (success or injected failure), in any order.
 * Successful writes bump a monotonic stamp, mirroring the real service's
 * last-write-wins receipt order.
 */
export class MockServer {
	readonly labels = new Map<string, string | null>();
	readonly pending: PendingRequest[] = [];
	private stamp = 0;

	constructor(imageIds: string[]) {
		for (const id of imageIds) this.labels.set(id, null);
	}

	get fetch(): FetchLike {
		return (url, init) => {
			const method = init?.method ?? "GET";
			const labelMatch = url.match(/^\/images\/([^/]+)\/label$/);
			if (method === "PUT" && labelMatch) {
				const imageId = labelMatch[1]!;
				const body = JSON.parse(init?.body ?? "{}") as { label: string };
				return new Promise((resolve) => {
					this.pending.push({ imageId, label: body.label, settle: resolve });
				});
			}
			return Promise.resolve(jsonResponse(404, { detail: `no route ${method} ${url}` }));
		};
	}

	/** Settle pending request #index; a success applies the write. */
	settle(index: number, succeed: boolean): void {
		const request = this.pending.splice(index, 1)[0];
		if (!request) throw new Error(`no pending request ${index}`);
		if (!succeed) {
			request.settle(jsonResponse(503, { detail: "injected failure" }));
			return;
		}
		this.stamp += 1;
		this.labels.set(request.imageId, request.label);
		request.settle(
			jsonResponse(200, {
				image_id: request.imageId,
				owner_user_id: "alice",
				label: request.label,
				tags: [],
				updated_at: String(this.stamp).padStart(12, "0"),
				updated_by: "alice",
			}),
		);
	}

	settleAll(decide: () => boolean): void {
		while (this.pending.length > 0) {
			this.settle(0, decide());
		}
	}
}

/** Deterministic PRNG so failure scripts are reproducible. */
export function mulberry32(seed: number): () => number {
	let a = seed >>> 0;
	return () => {
		a = (a + 0x6d2b79f5) >>> 0;
		let t = a;
		t = Math.imul(t ^ (t >>> 15), t | 1);
		t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
		return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
	};
}
