/**
 * Typed client for the study service HTTP API under /study/v1.
 *
 * The fetch implementation is injected so tests can substitute a fake
 * transport; the browser entry point passes window.fetch.
 */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type StudyKind = "pairwise_preference" | "curation_vetting";

export interface StudyItem {
    item_id: string;
    sample_id: string;
    kind: StudyKind;
    left_system: string | null;
    right_system: string | null;
    left_video: string | null;
    right_video: string | null;
    video_path: string | null;
    html_code: string | null;
}

export interface Progress {
    study_id: string;
    items: number;
    annotators: number;
    judgments: number;
    expected_judgments: number;
}

export interface Judgment {
    item_id: string;
    annotator_id: string;
    choice: string;
    reason: string;
    timestamp: number;
    presentation_order: string | null;
}

export interface StudySummary {
    id: string;
    kind: StudyKind;
    items: number;
    annotators: string[];
}

export interface SystemAggregate {
    system: string;
    wins: number;
    losses: number;
    ties: number;
    judgments: number;
    win_rate: number;
    wins_shown_left: number;
    wins_shown_right: number;
}

export interface PairwiseAggregate {
    study_id: string;
    kind: "pairwise_preference";
    judgments: number;
    systems: SystemAggregate[];
}

export interface VettingAggregate {
    study_id: string;
    kind: "curation_vetting";
    judgments: number;
    approved: number;
    rejected: number;
    reject_reasons: string[];
}

export type Aggregate = PairwiseAggregate | VettingAggregate;

export type NextResponse =
    | { done: false; item: StudyItem }
    | { done: true; progress: Progress };

export interface JudgmentSubmission {
    item_id: string;
    annotator_id: string;
    choice: string;
    reason?: string;
}

/**
 * Outcome of a judgment submission. A 409 from the server means this
 * annotator already judged the item (for example when a response was lost
 * and the client resubmitted), so the work is settled either way.
 */
export type SubmitResult =
    | { status: "recorded"; judgment: Judgment }
    | { status: "duplicate" };

/** Raised for HTTP error responses, carrying the server's message. */
export class ApiError extends Error {
    readonly status: number;

    constructor(message: string, status: number) {
        super(message);
        this.name = "ApiError";
        this.status = status;
    }
}

async function errorMessage(response: Response): Promise<string> {
    try {
        const body = (await response.json()) as { error?: unknown };
        if (body && typeof body.error === "string") {
            return body.error;
        }
    } catch {
        // Non-JSON error body; fall through to the status line.
    }
    return `request failed with status ${response.status}`;
}

export class StudyClient {
    private readonly fetchImpl: FetchLike;
    private readonly base: string;

    constructor(fetchImpl: FetchLike, base = "") {
        this.fetchImpl = fetchImpl;
        this.base = base.replace(/\/+$/, "");
    }

    /** Resolve a video path from a study item against the media mount. */
    mediaUrl(path: string): string {
        const parts = path.split("/").map(encodeURIComponent);
        return `${this.base}/study/media/${parts.join("/")}`;
    }

    async health(): Promise<{ status: string; studies: number }> {
        return this.get("/study/v1/health");
    }

    async listStudies(): Promise<StudySummary[]> {
        const body = await this.get<{ studies: StudySummary[] }>(
            "/study/v1/studies",
        );
        return body.studies;
    }

    async nextItem(studyId: string, annotator: string): Promise<NextResponse> {
        const query = encodeURIComponent(annotator);
        return this.get(
            `/study/v1/studies/${encodeURIComponent(studyId)}/next?annotator=${query}`,
        );
    }

    async submitJudgment(
        studyId: string,
        submission: JudgmentSubmission,
    ): Promise<SubmitResult> {
        const url = `${this.base}/study/v1/studies/${encodeURIComponent(studyId)}/judgments`;
        const response = await this.fetchImpl(url, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ reason: "", ...submission }),
        });
        if (response.status === 409) {
            return { status: "duplicate" };
        }
        if (!response.ok) {
            throw new ApiError(await errorMessage(response), response.status);
        }
        return { status: "recorded", judgment: (await response.json()) as Judgment };
    }

    async progress(studyId: string): Promise<Progress> {
        return this.get(`/study/v1/studies/${encodeURIComponent(studyId)}/progress`);
    }

    async aggregate(studyId: string): Promise<Aggregate> {
        return this.get(`/study/v1/studies/${encodeURIComponent(studyId)}/aggregate`);
    }

    private async get<T>(path: string): Promise<T> {
        const response = await this.fetchImpl(`${this.base}${path}`);
        if (!response.ok) {
            throw new ApiError(await errorMessage(response), response.status);
        }
        return (await response.json()) as T;
    }
}
