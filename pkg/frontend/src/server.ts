/**
 * Newline-delimited JSON service over stdio.
 *
 * Requests:  {id, op: "parse", source} | {id, op: "print", ast}
 * Replies:   {id, ok: true, ast|source} | {id, ok: false, error: {kind, message, line?, col?}}
 *
 * One reply per request line, in request order. Malformed lines produce an
 * error reply with id null; the process never exits on bad input.
 */

import * as readline from "readline";
import { parse as acornParse } from "acorn";
import { generate } from "astring";
import { SUPPORTED_KINDS } from "./registry";

interface ErrorBody {
  kind: string;
  message: string;
  line?: number;
  col?: number;
}

type Reply =
  | { id: unknown; ok: true; ast?: unknown; source?: string }
  | { id: unknown; ok: false; error: ErrorBody };

const DROP_KEYS = new Set(["start", "end", "loc", "range", "sourceType", "comments"]);

class UnsupportedNode extends Error {}

/** Strip positions, reject unsupported kinds, normalize regex/bigint values. */
function sanitize(node: any): any {
  if (Array.isArray(node)) {
    return node.map((item) => {
      if (item === null) {
        throw new UnsupportedNode("ArrayHole");
      }
      return sanitize(item);
    });
  }
  if (node === null || typeof node !== "object") {
    return node;
  }
  const type = node.type;
  if (typeof type === "string" && !SUPPORTED_KINDS.has(type)) {
    throw new UnsupportedNode(type);
  }
  if (typeof node.bigint === "string") {
    throw new UnsupportedNode("BigIntLiteral");
  }
  const out: Record<string, unknown> = {};
  for (const key of Object.keys(node)) {
    if (DROP_KEYS.has(key)) {
      continue;
    }
    const value = node[key];
    if (key === "value" && node.regex !== undefined) {
      out.value = null; // RegExp objects do not survive JSON
      continue;
    }
    if (key === "regex") {
      out.regex = { pattern: node.regex.pattern, flags: node.regex.flags };
      continue;
    }
    out[key] = sanitize(value);
  }
  return out;
}

function doParse(source: string): unknown {
  const ast = acornParse(source, {
    ecmaVersion: 2020,
    sourceType: "script",
    locations: false,
    ranges: false,
  });
  return sanitize(ast);
}

export function handleLine(line: string): string {
  let request: any;
  try {
    request = JSON.parse(line);
  } catch {
    return JSON.stringify({
      id: null,
      ok: false,
      error: { kind: "protocol", message: "request line is not valid JSON" },
    });
  }
  if (request === null || typeof request !== "object") {
    return JSON.stringify({
      id: null,
      ok: false,
      error: { kind: "protocol", message: "request must be an object" },
    });
  }
  const id = "id" in request ? request.id : null;
  const fail = (error: ErrorBody): string => JSON.stringify({ id, ok: false, error });

  try {
    if (request.op === "parse") {
      if (typeof request.source !== "string") {
        return fail({ kind: "protocol", message: "parse needs a source string" });
      }
      return JSON.stringify({ id, ok: true, ast: doParse(request.source) });
    }
    if (request.op === "print") {
      if (request.ast === null || typeof request.ast !== "object") {
        return fail({ kind: "protocol", message: "print needs an ast object" });
      }
      const source = generate(request.ast as any);
      return JSON.stringify({ id, ok: true, source });
    }
    return fail({ kind: "protocol", message: `unknown op ${String(request.op)}` });
  } catch (e: any) {
    if (e instanceof UnsupportedNode) {
      return fail({ kind: "unsupported", message: e.message });
    }
    if (e && e.loc && typeof e.loc.line === "number") {
      return fail({
        kind: "syntax",
        message: String(e.message),
        line: e.loc.line,
        col: e.loc.column,
      });
    }
    return fail({ kind: "print", message: String(e && e.message ? e.message : e) });
  }
}

export function serve(): void {
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    process.stdout.write(handleLine(line) + "\n");
  });
}

if (require.main === module) {
  serve();
}
