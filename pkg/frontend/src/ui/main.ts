/**
 * Browser entry point. The page is served from the study service's /ui
 * mount and is addressed as /ui/?study=<id>&annotator=<name>; it talks to
 * the same origin, so the client base URL is empty.
 */

import { StudyClient } from "./api.js";
import { clear, el } from "./dom.js";
import { installKeyboard, renderPairwise } from "./pairwise.js";
import { renderVetting } from "./vetting.js";
import { doneScreen, errorScreen, loadingScreen } from "./widgets.js";
import { AnnotationSession } from "./state.js";
import type { SessionState } from "./state.js";

function setupHint(doc: Document): HTMLElement {
    return el(doc, "section", { class: "screen error-screen" }, [
        el(doc, "h2", {}, ["Missing session parameters"]),
        el(doc, "p", {}, [
            "Open this page as /ui/?study=<study id>&annotator=<your name>.",
        ]),
    ]);
}

function render(
    doc: Document,
    root: Element,
    state: SessionState,
    client: StudyClient,
    session: AnnotationSession,
): void {
    const media = (path: string) => client.mediaUrl(path);
    const screen = (() => {
        if (state.phase === "done") {
            return doneScreen(doc, state.progress);
        }
        if (state.phase === "error") {
            return errorScreen(doc, state.error ?? "unknown error", () => {
                void session.start();
            });
        }
        if (state.item === null) {
            return loadingScreen(doc);
        }
        if (state.item.kind === "pairwise_preference") {
            return renderPairwise(doc, state, media, {
                onChoice: (choice) => void session.submit(choice),
                onRetry: () => void session.retrySubmit(),
            });
        }
        return renderVetting(doc, state, media, {
            onJudge: (choice, reason) => void session.submit(choice, reason),
            onRetry: () => void session.retrySubmit(),
        });
    })();
    clear(root);
    root.append(screen);
}

export function boot(win: Window & typeof globalThis): void {
    const doc = win.document;
    const root = doc.getElementById("app");
    if (root === null) {
        throw new Error("missing #app mount point");
    }
    const params = new win.URLSearchParams(win.location.search);
    const studyId = params.get("study");
    const annotator = params.get("annotator");
    if (!studyId || !annotator) {
        clear(root);
        root.append(setupHint(doc));
        return;
    }
    const client = new StudyClient(win.fetch.bind(win));
    const session = new AnnotationSession(client, studyId, annotator);
    session.subscribe((state) => render(doc, root, state, client, session));
    installKeyboard(doc, (choice) => {
        if (session.state.item?.kind === "pairwise_preference") {
            void session.submit(choice);
        }
    });
    void session.start();
}

boot(window);
