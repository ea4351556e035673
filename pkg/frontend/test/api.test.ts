import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { FetchLike } from "../src/types.js";

function recordingFetch(status: number, payload: unknown) {
	const calls: Array<{ url: string; init?: Parameters<FetchLike>[1] }> = [];
	const fetchFn: FetchLike = async (url, init) => {
		calls.push({ url, init });
		return {
			ok: status >= 200 && status < 300,
			status,
			json: async () => payload,
			text: async () => JSON.stringify(payload),
		};
	};
	return { calls, fetchFn };
}

describe("api client", () => {
	it("sends the bearer token after login", async () => {
		const { calls, fetchFn } = recordingFetch(200, { token: "tok-1", user_id: "alice" });
		const api = new ApiClient("", fetchFn);
		await api.login("alice", "secret");
		expect(calls[0]!.init?.headers?.["X-Service-Secret"]).toBe("secret");
		await api.taxonomy();
		expect(calls[1]!.init?.headers?.["Authorization"]).toBe("Bearer tok-1");
	});

	it("hits the documented endpoints", async () => {
		const { calls, fetchFn } = recordingFetch(200, {});
		const api = new ApiClient("", fetchFn);
		api.setToken("t");
		await api.listImages("alice", 2, 48);
		await api.setLabel("img-9", "Cooking");
		await api.addTag("img-9", "kitchen");
		await api.removeTag("img-9", "a tag");
		expect(calls.map((c) => c.url)).toEqual([
			"/collections/alice/images?page=2&size=48",
			"/images/img-9/label",
			"/images/img-9/tags",
			"/images/img-9/tags/a%20tag",
		]);
		expect(calls[1]!.init?.method).toBe("PUT");
		expect(JSON.parse(calls[1]!.init?.body ?? "")).toEqual({ label: "Cooking" });
	});

	it("surfaces server error details as ApiError", async () => {
		const { fetchFn } = recordingFetch(403, { detail: "access denied" });
		const api = new ApiClient("", fetchFn);
		api.setToken("t");
		await expect(api.setLabel("img-1", "TV")).rejects.toThrowError(ApiError);
		await expect(api.setLabel("img-1", "TV")).rejects.toThrow("access denied");
	});
});
