/**
 * Session state machine for one annotator working through one study.
 *
 * The server is the source of truth: the client always asks it for the next
 * unjudged item, so reloading the page re-serves the same item until a
 * judgment lands. Submissions are optimistic; when the network fails the
 * selection is kept and offered for retry, and a duplicate response (the
 * first attempt actually landed) counts as settled.
 */

import type { Progress, StudyItem, SubmitResult } from "./api.js";

/** The slice of the API client the session needs, easy to fake in tests. */
export interface SessionClient {
    nextItem(
        studyId: string,
        annotator: string,
    ): Promise<{ done: boolean; item?: StudyItem; progress?: Progress }>;
    submitJudgment(
        studyId: string,
        submission: {
            item_id: string;
            annotator_id: string;
            choice: string;
            reason: string;
        },
    ): Promise<SubmitResult>;
    progress(studyId: string): Promise<Progress>;
}

export type Phase =
    /** Fetching the next item or the initial one. */
    | "loading"
    /** An item is on screen waiting for a choice. */
    | "annotating"
    /** A judgment is in flight. */
    | "submitting"
    /** A submission failed; the selection is kept for retry. */
    | "retry"
    /** Loading failed; nothing selected, offer a reload. */
    | "error"
    /** The queue is exhausted for this annotator. */
    | "done";

export interface PendingChoice {
    choice: string;
    reason: string;
}

export interface SessionState {
    phase: Phase;
    item: StudyItem | null;
    progress: Progress | null;
    pending: PendingChoice | null;
    error: string | null;
}

export type Listener = (state: SessionState) => void;

function describe(error: unknown): string {
    return error instanceof Error ? error.message : String(error);
}

export class AnnotationSession {
    private readonly client: SessionClient;
    private readonly studyId: string;
    private readonly annotatorId: string;
    private readonly listeners: Listener[] = [];

    private phase: Phase = "loading";
    private item: StudyItem | null = null;
    private progress: Progress | null = null;
    private pending: PendingChoice | null = null;
    private error: string | null = null;

    constructor(client: SessionClient, studyId: string, annotatorId: string) {
        this.client = client;
        this.studyId = studyId;
        this.annotatorId = annotatorId;
    }

    get state(): SessionState {
        return {
            phase: this.phase,
            item: this.item,
            progress: this.progress,
            pending: this.pending,
            error: this.error,
        };
    }

    subscribe(listener: Listener): () => void {
        this.listeners.push(listener);
        return () => {
            const index = this.listeners.indexOf(listener);
            if (index >= 0) {
                this.listeners.splice(index, 1);
            }
        };
    }

    /** Fetch the first item. Also used to reload after a loading error. */
    async start(): Promise<void> {
        await this.loadNext();
    }

    /**
     * Submit a choice for the current item. Ignored unless an item is on
     * screen (or a failed submission is being replaced), so double clicks
     * and stray key presses while a request is in flight do nothing.
     */
    async submit(choice: string, reason = ""): Promise<void> {
        if (this.phase !== "annotating" && this.phase !== "retry") {
            return;
        }
        if (this.item === null) {
            return;
        }
        this.pending = { choice, reason };
        await this.deliver();
    }

    /** Resubmit the selection kept from a failed attempt. */
    async retrySubmit(): Promise<void> {
        if (this.phase !== "retry" || this.pending === null) {
            return;
        }
        await this.deliver();
    }

    private async deliver(): Promise<void> {
        const item = this.item;
        const pending = this.pending;
        if (item === null || pending === null) {
            return;
        }
        this.setPhase("submitting");
        try {
            await this.client.submitJudgment(this.studyId, {
                item_id: item.item_id,
                annotator_id: this.annotatorId,
                choice: pending.choice,
                reason: pending.reason,
            });
        } catch (error) {
            this.error = describe(error);
            this.setPhase("retry");
            return;
        }
        this.pending = null;
        await this.loadNext();
    }

    private async loadNext(): Promise<void> {
        this.setPhase("loading");
        try {
            const [next, progress] = await Promise.all([
                this.client.nextItem(this.studyId, this.annotatorId),
                this.client.progress(this.studyId),
            ]);
            this.progress = next.done && next.progress ? next.progress : progress;
            if (next.done) {
                this.item = null;
                this.setPhase("done");
            } else {
                this.item = next.item ?? null;
                this.setPhase(this.item === null ? "error" : "annotating");
            }
        } catch (error) {
            this.error = describe(error);
            this.setPhase("error");
        }
    }

    private setPhase(phase: Phase): void {
        this.phase = phase;
        if (phase !== "retry" && phase !== "error") {
            this.error = null;
        }
        const snapshot = this.state;
        for (const listener of [...this.listeners]) {
            listener(snapshot);
        }
    }
}
