#!/usr/bin/env node
// Deterministic stand-in for a DevTools-debuggable browser.
//
// Speaks the same wire protocol a headless browser exposes on its debugging
// port: HTTP discovery endpoints plus a WebSocket carrying JSON commands with
// flat session routing. Every page lives in its own worker thread so an
// infinite loop in page script never blocks the protocol endpoint.
//
// Usage: node mock_browser.js [--port N] [--host H]
// Prints one JSON line with the chosen endpoint once listening.
"use strict";

const http = require("http");
const crypto = require("crypto");
const path = require("path");
const { Worker } = require("worker_threads");

const WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
const VERSION = {
  Browser: "MockBrowser/1.0",
  "Protocol-Version": "1.3",
  "User-Agent": "MockBrowser/1.0 (deterministic headless)",
  "V8-Version": process.versions.v8,
  "WebKit-Version": "mock",
};

function parseArgs(argv) {
  const args = { port: 0, host: "127.0.0.1" };
  for (let i = 2; i < argv.length; i++) {
    if (argv[i] === "--port") args.port = parseInt(argv[++i], 10) || 0;
    else if (argv[i] === "--host") args.host = argv[++i];
  }
  return args;
}

// ---------------------------------------------------------------------------
// Minimal RFC 6455 server side: accept, decode masked client frames
// (including fragmented messages), send unmasked text frames.
// ---------------------------------------------------------------------------

class WsConnection {
  constructor(socket) {
    this.socket = socket;
    this.buffer = Buffer.alloc(0);
    this.fragments = [];
    this.onmessage = null;
    this.onclose = null;
    this.closed = false;
    socket.on("data", (data) => this._feed(data));
    const close = () => this._close();
    socket.on("close", close);
    socket.on("error", close);
  }

  _close() {
    if (this.closed) return;
    this.closed = true;
    if (this.onclose) this.onclose();
    this.socket.destroy();
  }

  _feed(data) {
    this.buffer = Buffer.concat([this.buffer, data]);
    while (true) {
      const frame = this._readFrame();
      if (!frame) break;
      const { fin, opcode, payload } = frame;
      if (opcode === 0x8) {
        this._sendRaw(0x8, Buffer.alloc(0));
        this._close();
        return;
      }
      if (opcode === 0x9) {
        this._sendRaw(0xa, payload);
        continue;
      }
      if (opcode === 0xa) continue;
      if (opcode === 0x1 || opcode === 0x2 || opcode === 0x0) {
        this.fragments.push(payload);
        if (fin) {
          const message = Buffer.concat(this.fragments).toString("utf8");
          this.fragments = [];
          if (this.onmessage) this.onmessage(message);
        }
      }
    }
  }

  _readFrame() {
    const buf = this.buffer;
    if (buf.length < 2) return null;
    const fin = (buf[0] & 0x80) !== 0;
    const opcode = buf[0] & 0x0f;
    const masked = (buf[1] & 0x80) !== 0;
    let len = buf[1] & 0x7f;
    let offset = 2;
    if (len === 126) {
      if (buf.length < 4) return null;
      len = buf.readUInt16BE(2);
      offset = 4;
    } else if (len === 127) {
      if (buf.length < 10) return null;
      len = Number(buf.readBigUInt64BE(2));
      offset = 10;
    }
    let mask = null;
    if (masked) {
      if (buf.length < offset + 4) return null;
      mask = buf.subarray(offset, offset + 4);
      offset += 4;
    }
    if (buf.length < offset + len) return null;
    const payload = Buffer.from(buf.subarray(offset, offset + len));
    this.buffer = buf.subarray(offset + len);
    if (mask) {
      for (let i = 0; i < payload.length; i++) payload[i] ^= mask[i % 4];
    }
    return { fin, opcode, payload };
  }

  _sendRaw(opcode, payload) {
    if (this.closed) return;
    let header;
    if (payload.length < 126) {
      header = Buffer.from([0x80 | opcode, payload.length]);
    } else if (payload.length < 65536) {
      header = Buffer.alloc(4);
      header[0] = 0x80 | opcode;
      header[1] = 126;
      header.writeUInt16BE(payload.length, 2);
    } else {
      header = Buffer.alloc(10);
      header[0] = 0x80 | opcode;
      header[1] = 127;
      header.writeBigUInt64BE(BigInt(payload.length), 2);
    }
    this.socket.write(Buffer.concat([header, payload]));
  }

  sendText(text) {
    this._sendRaw(0x1, Buffer.from(text, "utf8"));
  }
}

function acceptUpgrade(req, socket) {
  const key = req.headers["sec-websocket-key"];
  if (!key) {
    socket.destroy();
    return null;
  }
  const accept = crypto
    .createHash("sha1")
    .update(key + WS_GUID)
    .digest("base64");
  socket.write(
    "HTTP/1.1 101 Switching Protocols\r\n" +
      "Upgrade: websocket\r\n" +
      "Connection: Upgrade\r\n" +
      `Sec-WebSocket-Accept: ${accept}\r\n` +
      "\r\n",
  );
  socket.setNoDelay(true);
  return new WsConnection(socket);
}

// ---------------------------------------------------------------------------
// Target registry.
// ---------------------------------------------------------------------------

let targetSerial = 0;
let sessionSerial = 0;

// targetId -> {worker, url, sessions:Set<sessionId>, owner:WsConnection|null, alive}
const targets = new Map();
// sessionId -> {targetId, conn}
const sessions = new Map();
// `${sessionId}:${id}` -> {conn, id, sessionId}
const pendingByKey = new Map();

function createTarget(url, conn) {
  const targetId = `target-${++targetSerial}`;
  const worker = new Worker(path.join(__dirname, "page_worker.js"), {
    workerData: {},
  });
  const target = { worker, url: url || "about:blank", sessions: new Set(), owner: conn, alive: true };
  targets.set(targetId, target);
  worker.on("message", (msg) => onWorkerMessage(targetId, msg));
  worker.on("error", (err) => {
    process.stderr.write(`worker error for ${targetId}: ${err && err.stack}\n`);
    destroyTarget(targetId, `worker crashed: ${err && err.message}`);
  });
  worker.on("exit", () => {
    failPending(targetId, "Target closed");
  });
  return targetId;
}

function onWorkerMessage(targetId, msg) {
  const target = targets.get(targetId);
  if (!target) return;
  if (msg.kind === "result" || msg.kind === "error") {
    for (const sessionId of target.sessions) {
      const key = `${sessionId}:${msg.id}`;
      const pending = pendingByKey.get(key);
      if (!pending) continue;
      pendingByKey.delete(key);
      if (msg.kind === "result") {
        sendJson(pending.conn, { id: msg.id, sessionId, result: msg.result });
      } else {
        sendJson(pending.conn, {
          id: msg.id,
          sessionId,
          error: { code: -32601, message: msg.message },
        });
      }
      return;
    }
    return;
  }
  if (msg.kind === "event") {
    for (const sessionId of target.sessions) {
      const session = sessions.get(sessionId);
      if (session) {
        sendJson(session.conn, { method: msg.method, params: msg.params, sessionId });
      }
    }
  }
}

function failPending(targetId, message) {
  for (const [key, pending] of [...pendingByKey.entries()]) {
    if (pending.targetId === targetId) {
      pendingByKey.delete(key);
      sendJson(pending.conn, {
        id: pending.id,
        sessionId: pending.sessionId,
        error: { code: -32000, message },
      });
    }
  }
}

function destroyTarget(targetId, reason) {
  const target = targets.get(targetId);
  if (!target) return false;
  targets.delete(targetId);
  target.alive = false;
  for (const sessionId of target.sessions) {
    const session = sessions.get(sessionId);
    sessions.delete(sessionId);
    if (session && !session.conn.closed) {
      sendJson(session.conn, {
        method: "Target.detachedFromTarget",
        params: { sessionId, targetId },
      });
    }
  }
  failPending(targetId, reason || "Target closed");
  target.worker.terminate();
  return true;
}

function sendJson(conn, obj) {
  if (conn && !conn.closed) conn.sendText(JSON.stringify(obj));
}

// ---------------------------------------------------------------------------
// Browser-level command handling.
// ---------------------------------------------------------------------------

function handleBrowserCommand(conn, msg) {
  const { id, method, params = {} } = msg;
  switch (method) {
    case "Browser.getVersion":
      sendJson(conn, {
        id,
        result: {
          protocolVersion: "1.3",
          product: "MockBrowser/1.0",
          revision: "0",
          userAgent: VERSION["User-Agent"],
          jsVersion: process.versions.v8,
        },
      });
      return;
    case "Browser.close":
      sendJson(conn, { id, result: {} });
      setImmediate(() => process.exit(0));
      return;
    case "Target.getTargets":
      sendJson(conn, {
        id,
        result: {
          targetInfos: [...targets.entries()].map(([targetId, t]) => ({
            targetId,
            type: "page",
            title: "",
            url: t.url,
            attached: t.sessions.size > 0,
          })),
        },
      });
      return;
    case "Target.createTarget": {
      const targetId = createTarget(params.url, conn);
      sendJson(conn, { id, result: { targetId } });
      return;
    }
    case "Target.attachToTarget": {
      const target = targets.get(params.targetId);
      if (!target) {
        sendJson(conn, { id, error: { code: -32000, message: "No target with given id found" } });
        return;
      }
      const sessionId = `session-${++sessionSerial}`;
      target.sessions.add(sessionId);
      sessions.set(sessionId, { targetId: params.targetId, conn });
      sendJson(conn, {
        method: "Target.attachedToTarget",
        params: {
          sessionId,
          targetInfo: { targetId: params.targetId, type: "page", title: "", url: target.url, attached: true },
          waitingForDebugger: false,
        },
      });
      sendJson(conn, { id, result: { sessionId } });
      return;
    }
    case "Target.detachFromTarget": {
      const session = sessions.get(params.sessionId);
      if (session) {
        const target = targets.get(session.targetId);
        if (target) target.sessions.delete(params.sessionId);
        sessions.delete(params.sessionId);
      }
      sendJson(conn, { id, result: {} });
      return;
    }
    case "Target.closeTarget": {
      const ok = destroyTarget(params.targetId, "Target closed");
      sendJson(conn, { id, result: { success: ok } });
      return;
    }
    case "Target.setDiscoverTargets":
    case "Target.setAutoAttach":
      sendJson(conn, { id, result: {} });
      return;
    default:
      sendJson(conn, { id, error: { code: -32601, message: `'${method}' wasn't found` } });
  }
}

function handleSessionCommand(conn, msg) {
  const { id, method, sessionId, params } = msg;
  const session = sessions.get(sessionId);
  if (!session) {
    sendJson(conn, { id, sessionId, error: { code: -32001, message: "Session not found" } });
    return;
  }
  const target = targets.get(session.targetId);
  if (!target || !target.alive) {
    sendJson(conn, { id, sessionId, error: { code: -32000, message: "Target closed" } });
    return;
  }
  if (method === "Target.closeTarget" || method === "Page.close") {
    destroyTarget(session.targetId, "Target closed");
    sendJson(conn, { id, sessionId, result: { success: true } });
    return;
  }
  pendingByKey.set(`${sessionId}:${id}`, { conn, id, sessionId, targetId: session.targetId });
  target.worker.postMessage({ kind: "cdp", id, method, params });
}

function handleConnection(conn) {
  const owned = new Set();
  conn.onmessage = (text) => {
    let msg;
    try {
      msg = JSON.parse(text);
    } catch {
      return;
    }
    if (typeof msg.id !== "number" && typeof msg.id !== "string") return;
    if (msg.sessionId) {
      handleSessionCommand(conn, msg);
    } else {
      if (msg.method === "Target.createTarget") {
        const before = new Set(targets.keys());
        handleBrowserCommand(conn, msg);
        for (const targetId of targets.keys()) {
          if (!before.has(targetId)) owned.add(targetId);
        }
      } else {
        handleBrowserCommand(conn, msg);
      }
    }
  };
  conn.onclose = () => {
    // Connection-scoped cleanup: pages created over this socket die with it.
    for (const targetId of owned) destroyTarget(targetId, "Connection closed");
    for (const [sessionId, session] of [...sessions.entries()]) {
      if (session.conn === conn) {
        const target = targets.get(session.targetId);
        if (target) target.sessions.delete(sessionId);
        sessions.delete(sessionId);
      }
    }
  };
}

// ---------------------------------------------------------------------------
// HTTP endpoints + startup.
// ---------------------------------------------------------------------------

function main() {
  const args = parseArgs(process.argv);
  const server = http.createServer((req, res) => {
    const url = req.url.split("?")[0];
    if (url === "/json/version" || url === "/json/version/") {
      const body = JSON.stringify({
        ...VERSION,
        webSocketDebuggerUrl: `ws://${args.host}:${actualPort()}/devtools/browser/mock`,
      });
      res.writeHead(200, { "Content-Type": "application/json" });
      res.end(body);
      return;
    }
    if (url === "/json" || url === "/json/list" || url === "/json/list/") {
      const body = JSON.stringify(
        [...targets.entries()].map(([targetId, t]) => ({
          id: targetId,
          type: "page",
          title: "",
          url: t.url,
          webSocketDebuggerUrl: `ws://${args.host}:${actualPort()}/devtools/page/${targetId}`,
        })),
      );
      res.writeHead(200, { "Content-Type": "application/json" });
      res.end(body);
      return;
    }
    res.writeHead(404, { "Content-Type": "text/plain" });
    res.end("not found");
  });

  server.on("upgrade", (req, socket) => {
    const conn = acceptUpgrade(req, socket);
    if (conn) handleConnection(conn);
  });

  const actualPort = () => server.address().port;
  server.listen(args.port, args.host, () => {
    process.stdout.write(
      JSON.stringify({
        host: args.host,
        port: actualPort(),
        webSocketDebuggerUrl: `ws://${args.host}:${actualPort()}/devtools/browser/mock`,
      }) + "\n",
    );
  });

  const shutdown = () => {
    for (const targetId of [...targets.keys()]) destroyTarget(targetId, "Browser closing");
    server.close(() => process.exit(0));
    setTimeout(() => process.exit(0), 500).unref();
  };
  process.on("SIGTERM", shutdown);
  process.on("SIGINT", shutdown);
}

main();
