/**
 * Pairwise preference screen: two charts loop side by side and the
 * annotator picks left, right, or tie.
 *
 * The rendered markup never mentions which system produced which side;
 * panes are labeled Left and Right only. Side assignment is already
 * randomized per item by the study service.
 */

import { el } from "./dom.js";
import { progressBar, retryBanner } from "./widgets.js";
import type { SessionState } from "./state.js";

export type PairwiseChoice = "left" | "right" | "tie";

export interface PairwiseHandlers {
    onChoice(choice: PairwiseChoice): void;
    onRetry(): void;
}

/** Resolves a study item's video path to a URL the browser can load. */
export type MediaResolver = (path: string) => string;

/** Map a keyboard key to a choice, or null when the key is not a shortcut. */
export function choiceForKey(key: string): PairwiseChoice | null {
    switch (key) {
        case "ArrowLeft":
            return "left";
        case "ArrowRight":
            return "right";
        case "t":
        case "T":
            return "tie";
        default:
            return null;
    }
}

function isFormField(target: EventTarget | null): boolean {
    if (target === null || !("tagName" in target)) {
        return false;
    }
    const tag = (target as Element).tagName;
    return tag === "INPUT" || tag === "SELECT" || tag === "TEXTAREA";
}

/**
 * Listen for the left/right/tie shortcuts on the document. Key presses
 * inside form fields (the vetting reason picker) are left alone. Returns a
 * function that removes the listener.
 */
export function installKeyboard(
    doc: Document,
    onChoice: (choice: PairwiseChoice) => void,
): () => void {
    const handler = (event: Event): void => {
        const key = (event as KeyboardEvent).key;
        if (isFormField(event.target)) {
            return;
        }
        const choice = choiceForKey(key);
        if (choice !== null) {
            event.preventDefault();
            onChoice(choice);
        }
    };
    doc.addEventListener("keydown", handler);
    return () => doc.removeEventListener("keydown", handler);
}

/**
 * Keep two looping videos on the same timeline: whenever one side reports
 * progress, nudge the other if it has drifted more than a quarter second.
 */
export function syncVideos(a: HTMLVideoElement, b: HTMLVideoElement): void {
    const follow = (leader: HTMLVideoElement, follower: HTMLVideoElement) => {
        leader.addEventListener("timeupdate", () => {
            if (Math.abs(leader.currentTime - follower.currentTime) > 0.25) {
                follower.currentTime = leader.currentTime;
            }
        });
    };
    follow(a, b);
    follow(b, a);
}

function videoPane(
    doc: Document,
    label: string,
    src: string,
): { pane: HTMLElement; video: HTMLVideoElement } {
    const video = el(doc, "video", {
        class: "pane-video",
        src,
        autoplay: "",
        loop: "",
        muted: "",
        playsinline: "",
    });
    const pane = el(doc, "figure", { class: "pane" }, [
        video,
        el(doc, "figcaption", { class: "pane-label" }, [label]),
    ]);
    return { pane, video };
}

function choiceButton(
    doc: Document,
    choice: PairwiseChoice,
    text: string,
    state: SessionState,
    handlers: PairwiseHandlers,
): HTMLButtonElement {
    const button = el(doc, "button", {
        class: "choice-button",
        type: "button",
        "data-choice": choice,
    }, [text]);
    if (state.pending?.choice === choice) {
        button.classList.add("selected");
    }
    if (state.phase === "submitting" || state.phase === "loading") {
        button.disabled = true;
    }
    button.addEventListener("click", () => handlers.onChoice(choice));
    return button;
}

/** Build the pairwise screen for the current session state. */
export function renderPairwise(
    doc: Document,
    state: SessionState,
    media: MediaResolver,
    handlers: PairwiseHandlers,
): HTMLElement {
    const item = state.item;
    if (item === null || item.left_video === null || item.right_video === null) {
        throw new Error("pairwise screen needs an item with two videos");
    }
    const left = videoPane(doc, "Left", media(item.left_video));
    const right = videoPane(doc, "Right", media(item.right_video));
    syncVideos(left.video, right.video);

    const children: Array<Node | string> = [
        progressBar(doc, state.progress),
        el(doc, "div", { class: "video-pair" }, [left.pane, right.pane]),
    ];
    if (state.phase === "retry" && state.error !== null) {
        children.push(retryBanner(doc, state.error, () => handlers.onRetry()));
    }
    children.push(
        el(doc, "div", { class: "choices" }, [
            choiceButton(doc, "left", "Left is better (←)", state, handlers),
            choiceButton(doc, "tie", "Tie (T)", state, handlers),
            choiceButton(doc, "right", "Right is better (→)", state, handlers),
        ]),
        el(doc, "p", { class: "hint" }, [
            "Pick the chart whose animation looks correct and readable. ",
            "Shortcuts: left arrow, right arrow, T for tie.",
        ]),
    );
    return el(doc, "section", { class: "screen pairwise" }, children);
}
