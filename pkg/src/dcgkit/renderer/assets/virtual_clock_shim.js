"use strict";
/**
 * Virtual clock shim, injected into every page before any page script runs.
 *
 * Replaces the page's time sources (timers, animation frames, Date,
 * performance.now, Math.random) with a fully deterministic clock that only
 * moves when the harness calls `window.__vclock__.advanceTo(ms)`. Frame k of
 * a capture is then a pure function of k: same page + same advance schedule
 * means identical pixels, run after run.
 *
 * Semantics:
 *  - Virtual time starts at 0 ms; the wall clock (Date) is pinned to a fixed
 *    epoch plus virtual time.
 *  - advanceTo(t) fires due timeouts/intervals in (dueTime, id) order with the
 *    clock set to each callback's due time, then flushes the animation-frame
 *    queue once at t (one rAF tick per captured frame).
 *  - Callbacks that throw are reported via console.error and do not stop the
 *    advance; this mirrors browser timer isolation.
 *  - Zero-delay timers are clamped to 1 ms so self-rescheduling loops cannot
 *    stall an advance; a per-advance event cap backstops runaway cascades.
 */
(() => {
    const w = window;
    if (w.__vclock__) {
        return; // already installed
    }
    const WALL_EPOCH_MS = 1735689600000; // fixed origin for Date: 2025-01-01T00:00:00Z
    const MIN_DELAY_MS = 1;
    const MAX_EVENTS_PER_ADVANCE = 100000;
    let nowMs = 0;
    let nextId = 1;
    const timers = new Map();
    let rafQueue = [];
    const cancelledRaf = new Set();
    const realConsoleError = console.error.bind(console);
    function reportCallbackError(err) {
        const detail = err instanceof Error ? `${err.name}: ${err.message}` : String(err);
        realConsoleError(`Uncaught (in virtual timer) ${detail}`);
    }
    // --- timers ---------------------------------------------------------
    function schedule(callback, delay, intervalMs, args) {
        const id = nextId++;
        const delayMs = Math.max(Number(delay) || 0, MIN_DELAY_MS);
        const fn = typeof callback === "function"
            ? callback
            : // string callbacks are legal but rare; evaluate in global scope
                () => (0, eval)(String(callback));
        timers.set(id, { id, due: nowMs + delayMs, intervalMs, callback: fn, args });
        return id;
    }
    w.setTimeout = (cb, delay, ...args) => schedule(cb, delay, null, args);
    w.setInterval = (cb, delay, ...args) => schedule(cb, delay, Math.max(Number(delay) || 0, MIN_DELAY_MS), args);
    w.clearTimeout = (id) => {
        timers.delete(id);
    };
    w.clearInterval = (id) => {
        timers.delete(id);
    };
    // --- animation frames -------------------------------------------------
    w.requestAnimationFrame = (cb) => {
        const id = nextId++;
        rafQueue.push({ id, callback: cb });
        return id;
    };
    w.cancelAnimationFrame = (id) => {
        cancelledRaf.add(id);
    };
    // --- wall clock and monotonic clock ------------------------------------
    const RealDate = Date;
    // Whole milliseconds, like a real wall clock.
    const wallNow = () => Math.floor(WALL_EPOCH_MS + nowMs);
    const VirtualDate = function (...args) {
        if (!(this instanceof VirtualDate)) {
            return new RealDate(wallNow()).toString();
        }
        if (args.length === 0) {
            return new RealDate(wallNow());
        }
        return new RealDate(...args);
    };
    VirtualDate.now = wallNow;
    VirtualDate.parse = RealDate.parse;
    VirtualDate.UTC = RealDate.UTC;
    VirtualDate.prototype = RealDate.prototype;
    w.Date = VirtualDate;
    if (w.performance) {
        try {
            w.performance.now = () => nowMs;
        }
        catch {
            // some environments expose performance.now as read-only; Date still works
        }
    }
    // Seeded PRNG (mulberry32): pages using Math.random stay deterministic too.
    let randomState = 0x9e3779b9;
    Math.random = () => {
        randomState = (randomState + 0x6d2b79f5) | 0;
        let t = randomState;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
    // --- the advance loop ---------------------------------------------------
    function nextDueTimer(limit) {
        let best = null;
        for (const timer of timers.values()) {
            if (timer.due > limit)
                continue;
            if (!best || timer.due < best.due || (timer.due === best.due && timer.id < best.id)) {
                best = timer;
            }
        }
        return best;
    }
    function advanceTo(targetMs) {
        if (typeof targetMs !== "number" || !isFinite(targetMs)) {
            throw new Error(`advanceTo expects a finite number, got ${targetMs}`);
        }
        if (targetMs < nowMs) {
            throw new Error(`cannot rewind virtual time from ${nowMs} to ${targetMs}`);
        }
        let fired = 0;
        for (;;) {
            const timer = nextDueTimer(targetMs);
            if (!timer)
                break;
            if (++fired > MAX_EVENTS_PER_ADVANCE) {
                realConsoleError(`virtual clock: timer cascade exceeded ${MAX_EVENTS_PER_ADVANCE} events per advance`);
                break;
            }
            nowMs = timer.due;
            if (timer.intervalMs !== null) {
                timer.due = nowMs + timer.intervalMs;
            }
            else {
                timers.delete(timer.id);
            }
            try {
                timer.callback(...timer.args);
            }
            catch (err) {
                reportCallbackError(err);
            }
        }
        nowMs = targetMs;
        const batch = rafQueue;
        rafQueue = [];
        for (const entry of batch) {
            if (cancelledRaf.delete(entry.id))
                continue;
            try {
                entry.callback(nowMs);
            }
            catch (err) {
                reportCallbackError(err);
            }
        }
        return nowMs;
    }
    w.__vclock__ = {
        advanceTo,
        now: () => nowMs,
        pendingTimers: () => timers.size,
        pendingFrames: () => rafQueue.length,
    };
})();
