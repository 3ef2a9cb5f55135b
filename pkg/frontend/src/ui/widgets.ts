/** Screen fragments shared by the pairwise and vetting views. */

import { el } from "./dom.js";
import type { Progress } from "./api.js";

/** Progress bar with a judged-of-expected caption. */
export function progressBar(doc: Document, progress: Progress | null): HTMLElement {
    const judged = progress?.judgments ?? 0;
    const expected = progress?.expected_judgments ?? 0;
    const percent = expected > 0 ? Math.round((100 * judged) / expected) : 0;
    const fill = el(doc, "div", { class: "progress-fill" });
    fill.style.width = `${percent}%`;
    return el(doc, "div", { class: "progress" }, [
        el(doc, "div", { class: "progress-track" }, [fill]),
        el(doc, "span", { class: "progress-label" }, [
            `${judged} of ${expected} judgments`,
        ]),
    ]);
}

/**
 * Banner shown when a submission failed. The selection that failed to send
 * stays on screen; the button resubmits it unchanged.
 */
export function retryBanner(
    doc: Document,
    message: string,
    onRetry: () => void,
): HTMLElement {
    const button = el(doc, "button", { class: "retry-button", type: "button" }, [
        "Retry",
    ]);
    button.addEventListener("click", onRetry);
    return el(doc, "div", { class: "banner", role: "alert" }, [
        el(doc, "span", { class: "banner-message" }, [
            `Could not reach the server (${message}). Your selection was kept.`,
        ]),
        button,
    ]);
}

/** Shown when the loading call itself failed and there is nothing to retry. */
export function errorScreen(
    doc: Document,
    message: string,
    onReload: () => void,
): HTMLElement {
    const button = el(doc, "button", { class: "retry-button", type: "button" }, [
        "Reload",
    ]);
    button.addEventListener("click", onReload);
    return el(doc, "section", { class: "screen error-screen" }, [
        el(doc, "h2", {}, ["Something went wrong"]),
        el(doc, "p", {}, [message]),
        button,
    ]);
}

/** End-of-queue screen with the study totals. */
export function doneScreen(doc: Document, progress: Progress | null): HTMLElement {
    const detail =
        progress === null
            ? "All items are judged."
            : `${progress.judgments} of ${progress.expected_judgments} judgments are in.`;
    return el(doc, "section", { class: "screen done-screen" }, [
        el(doc, "h2", {}, ["All done"]),
        el(doc, "p", {}, [
            `No items are left in your queue. ${detail}`,
        ]),
    ]);
}

/** Plain loading placeholder. */
export function loadingScreen(doc: Document): HTMLElement {
    return el(doc, "section", { class: "screen loading-screen" }, [
        el(doc, "p", {}, ["Loading the next item..."]),
    ]);
}
