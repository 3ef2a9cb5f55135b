/**
 * Curation vetting screen: one candidate chart plays next to its source
 * code and the annotator approves it for the dataset or rejects it with a
 * reason category.
 */

import { el } from "./dom.js";
import { progressBar, retryBanner } from "./widgets.js";
import type { MediaResolver } from "./pairwise.js";
import type { SessionState } from "./state.js";

export type VettingChoice = "approve" | "reject";

export interface VettingHandlers {
    onJudge(choice: VettingChoice, reason: string): void;
    onRetry(): void;
}

/** Reason categories offered for a rejection; one must be picked. */
export const REJECT_REASONS: readonly string[] = [
    "does not match the question",
    "animation broken or frozen",
    "blank or unreadable chart",
    "data looks wrong",
    "other",
];

function reasonPicker(doc: Document): HTMLSelectElement {
    const select = el(doc, "select", { class: "reason-picker" });
    select.append(
        el(doc, "option", { value: "" }, ["Choose a reason..."]),
    );
    for (const reason of REJECT_REASONS) {
        select.append(el(doc, "option", { value: reason }, [reason]));
    }
    return select;
}

/** Build the vetting screen for the current session state. */
export function renderVetting(
    doc: Document,
    state: SessionState,
    media: MediaResolver,
    handlers: VettingHandlers,
): HTMLElement {
    const item = state.item;
    if (item === null || item.video_path === null) {
        throw new Error("vetting screen needs an item with a video");
    }
    const video = el(doc, "video", {
        class: "pane-video",
        src: media(item.video_path),
        autoplay: "",
        loop: "",
        muted: "",
        playsinline: "",
    });
    const code = el(doc, "code", {});
    code.textContent = item.html_code ?? "";

    const approve = el(doc, "button", {
        class: "choice-button approve",
        type: "button",
        "data-choice": "approve",
    }, ["Approve"]);
    const reject = el(doc, "button", {
        class: "choice-button reject",
        type: "button",
        "data-choice": "reject",
    }, ["Reject"]);
    const picker = reasonPicker(doc);
    const reasonHint = el(doc, "span", { class: "reason-hint", hidden: "" }, [
        "Pick a reason category before rejecting.",
    ]);

    if (state.pending?.choice === "approve") {
        approve.classList.add("selected");
    }
    if (state.pending?.choice === "reject") {
        reject.classList.add("selected");
        picker.value = state.pending.reason;
    }
    const busy = state.phase === "submitting" || state.phase === "loading";
    approve.disabled = busy;
    reject.disabled = busy;

    approve.addEventListener("click", () => handlers.onJudge("approve", ""));
    reject.addEventListener("click", () => {
        const reason = picker.value;
        if (reason === "") {
            reasonHint.removeAttribute("hidden");
            picker.classList.add("reason-missing");
            return;
        }
        handlers.onJudge("reject", reason);
    });
    picker.addEventListener("change", () => {
        if (picker.value !== "") {
            reasonHint.setAttribute("hidden", "");
            picker.classList.remove("reason-missing");
        }
    });

    const children: Array<Node | string> = [
        progressBar(doc, state.progress),
        el(doc, "div", { class: "vetting-pane" }, [
            el(doc, "figure", { class: "pane" }, [
                video,
                el(doc, "figcaption", { class: "pane-label" }, [
                    `Candidate ${item.sample_id}`,
                ]),
            ]),
            el(doc, "div", { class: "code-pane" }, [
                el(doc, "h3", {}, ["Chart source (modifications applied)"]),
                el(doc, "pre", { class: "code" }, [code]),
            ]),
        ]),
    ];
    if (state.phase === "retry" && state.error !== null) {
        children.push(retryBanner(doc, state.error, () => handlers.onRetry()));
    }
    children.push(
        el(doc, "div", { class: "choices" }, [
            approve,
            el(doc, "div", { class: "reject-group" }, [picker, reject, reasonHint]),
        ]),
    );
    return el(doc, "section", { class: "screen vetting" }, children);
}
