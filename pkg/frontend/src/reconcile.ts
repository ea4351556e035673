import type { ApiClient } from "./api.js";
import type { AnnotationResponse } from "./types.js";

export type BadgeStatus = "confirmed" | "pending" | "error";

export interface Badge {
	label: string | null;
	status: BadgeStatus;
}

interface ImageTrack {
	/** Last label acknowledged by the server. */
	serverLabel: string | null;
	/** Highest acknowledged write stamp; ISO strings order lexicographically. */
	ackStamp: string;
	/** Label of the most recent local request, re-sent by retry(). */
	desired: string | null;
	inflight: number;
}

/**
 * Optimistic label badges reconciled against server acknowledgments.
 *
 * Every apply paints the badge as pending and issues one PUT per image.
 * Acknowledgments may arrive out of order; the server label is taken from
 * the newest write stamp seen, and once an image has no requests in
 * flight its badge snaps to the server's label: confirmed when that is
 * what the user asked for, error (with retry available) otherwise.
 */
export class BadgeReconciler {
	private readonly tracks = new Map<string, ImageTrack>();
	private readonly listeners: Array<(id: string, badge: Badge) => void> = [];

	constructor(private readonly api: ApiClient) {}

	onBadgeChange(listener: (id: string, badge: Badge) => void): void {
		this.listeners.push(listener);
	}

	/** Seed server-known state from a loaded page. */
	prime(imageId: string, label: string | null): void {
		if (!this.tracks.has(imageId)) {
			this.tracks.set(imageId, {
				serverLabel: label,
				ackStamp: "",
				desired: label,
				inflight: 0,
			});
		}
	}

	badge(imageId: string): Badge {
		const track = this.tracks.get(imageId);
		if (!track) return { label: null, status: "confirmed" };
		if (track.inflight > 0) return { label: track.desired, status: "pending" };
		return {
			label: track.serverLabel,
			status: track.serverLabel === track.desired ? "confirmed" : "error",
		};
	}

	hasError(imageId: string): boolean {
		return this.badge(imageId).status === "error";
	}

	/** One PUT per selected image; resolves when all have settled. */
	async apply(selection: Iterable<string>, activity: string): Promise<void> {
		const settled: Promise<void>[] = [];
		for (const imageId of selection) {
			settled.push(this.applyOne(imageId, activity));
		}
		await Promise.all(settled);
	}

	async retry(imageId: string): Promise<void> {
		const track = this.tracks.get(imageId);
		if (!track || track.desired === null) return;
		await this.applyOne(imageId, track.desired);
	}

	private async applyOne(imageId: string, activity: string): Promise<void> {
		const track = this.tracks.get(imageId) ?? {
			serverLabel: null,
			ackStamp: "",
			desired: null,
			inflight: 0,
		};
		this.tracks.set(imageId, track);
		track.desired = activity;
		track.inflight += 1;
		this.emit(imageId);
		try {
			const ack: AnnotationResponse = await this.api.setLabel(imageId, activity);
			const stamp = ack.updated_at ?? "";
			if (stamp >= track.ackStamp) {
				track.ackStamp = stamp;
				track.serverLabel = ack.label;
			}
		} catch {
			// server state unchanged by a failed write; badge reverts on settle
		} finally {
			track.inflight -= 1;
			this.emit(imageId);
		}
	}

	private emit(imageId: string): void {
		const badge = this.badge(imageId);
		for (const listener of this.listeners) listener(imageId, badge);
	}

	settledLabels(): Map<string, string | null> {
		const out = new Map<string, string | null>();
		for (const [id, track] of this.tracks) out.set(id, track.serverLabel);
		return out;
	}
}

interface QueuedOp {
	imageId: string;
	activity: string;
}

/**
 * Holds label writes while the client is offline and replays them in
 * order on reconnect. Queued images surface as pending badges.
 */
export class OfflineQueue {
	private readonly queue: QueuedOp[] = [];
	private online = true;

	constructor(private readonly reconciler: BadgeReconciler) {}

	get pending(): readonly QueuedOp[] {
		return this.queue;
	}

	isOnline(): boolean {
		return this.online;
	}

	/** True when the image has a write waiting for reconnect (pending marker). */
	isQueued(imageId: string): boolean {
		return this.queue.some((op) => op.imageId === imageId);
	}

	async apply(selection: Iterable<string>, activity: string): Promise<void> {
		if (this.online) {
			await this.reconciler.apply(selection, activity);
			return;
		}
		for (const imageId of selection) {
			this.queue.push({ imageId, activity });
		}
	}

	goOffline(): void {
		this.online = false;
	}

	/** Reconnect and flush queued writes in submission order. */
	async goOnline(): Promise<void> {
		this.online = true;
		while (this.queue.length > 0) {
			const op = this.queue.shift()!;
			await this.reconciler.apply([op.imageId], op.activity);
		}
	}
}
