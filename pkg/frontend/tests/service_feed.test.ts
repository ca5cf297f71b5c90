/**
 * End-to-end tests against the real HTTP service.
 *
 * Boots `patchmotion`'s FastAPI app in a child process and exercises the
 * binding round-trip and playback-feed guarantees the UI relies on:
 * clicked bindings serialize to the exact schema and reload losslessly,
 * and with the match weight at 1.0 two different seeds produce
 * byte-identical playback feeds.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { acceptProposals, clickSourceJoint, clickTargetJoint, fromJson, toJson } from "../src/binding.js";
import { canTransfer, DEFAULT_CONFIG, fromSummary, transferBlocker } from "../src/state.js";
import type { BindingEditor } from "../src/binding.js";

const PORT = 7917;
const BASE = `http://127.0.0.1:${PORT}`;

const fixture = (name: string): string =>
  readFileSync(fileURLToPath(new URL(`../../fixtures/${name}`, import.meta.url)), "utf-8");

let service: ChildProcess;
let serviceLog = "";
const api = new ApiClient(BASE);

beforeAll(async () => {
  service = spawn(
    "python3",
    ["-c", `from patchmotion.service import run_service; run_service(port=${PORT})`],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  service.stdout?.on("data", (d) => (serviceLog += d));
  service.stderr?.on("data", (d) => (serviceLog += d));
  const deadline = Date.now() + 40_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/sessions/does-not-exist`);
      if (res.status === 404) return; // routing is up
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up:\n${serviceLog}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
});

afterAll(() => {
  service?.kill("SIGTERM");
});

/** Fresh session with the biped source and one quadruped example loaded. */
async function loadedSession(): Promise<string> {
  const sid = await api.createSession();
  await api.uploadSource(sid, "walk.bvh", fixture("biped_walk.bvh"));
  await api.uploadTargets(sid, [{ name: "amble.bvh", data: fixture("quadruped_amble.bvh") }]);
  return sid;
}

/** The manual workflow: click source joint, click target joint, thrice. */
function clickPairs(editor: BindingEditor): BindingEditor {
  for (const name of ["Spine", "Neck", "Head"]) {
    editor = clickTargetJoint(clickSourceJoint(editor, name), name);
  }
  return editor;
}

describe("session defaults", () => {
  it("a fresh session's config equals the UI defaults, field for field", async () => {
    const sid = await api.createSession();
    const summary = await api.summary(sid);
    expect(summary.config).toEqual(DEFAULT_CONFIG);
  });
});

describe("binding round-trip", () => {
  it("clicked bindings serialize to the exact schema and reload losslessly", async () => {
    const sid = await loadedSession();
    let state = fromSummary(await api.summary(sid));
    expect(canTransfer(state)).toBe(false);

    const editor = clickPairs(state.editor);
    const sent = toJson(editor);
    expect(sent).toEqual({
      pairs: [
        { target: "Spine", source: "Spine" },
        { target: "Neck", source: "Neck" },
        { target: "Head", source: "Head" },
      ],
      bind_root_velocity: true,
    });

    await api.putBindings(sid, sent);
    const summary = await api.summary(sid);
    expect(summary.bindings).toEqual(sent);

    // reload: rebuild the editor from the echoed JSON, nothing drifts
    const reloaded = toJson(fromJson(summary.bindings!));
    expect(reloaded).toEqual(sent);

    state = fromSummary(summary, state);
    expect(state.editor.pairs).toEqual(sent.pairs);
    expect(canTransfer(state)).toBe(true);
  });

  it("accept-all adopts exactly the service's autobind proposals", async () => {
    const sid = await loadedSession();
    const proposals = await api.autobind(sid, 4, 3);
    expect(proposals.length).toBeGreaterThan(0);
    expect(proposals[0].score).toBeGreaterThan(0);

    const editor = acceptProposals(fromSummary(await api.summary(sid)).editor, proposals);
    await api.putBindings(sid, toJson(editor));
    const echoed = (await api.summary(sid)).bindings!;
    expect(echoed.pairs).toEqual(editor.pairs);
  });

  it("transfer without bindings: button disabled in the UI, 409 on the wire", async () => {
    const sid = await loadedSession();
    const state = fromSummary(await api.summary(sid));
    expect(canTransfer(state)).toBe(false);
    expect(transferBlocker(state)).toMatch(/bind/);

    const err = await api.transfer(sid).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.error).toBe("NoBindings");
  });
});

describe("playback feeds", () => {
  it("alpha=1 feeds are byte-equal across seeds; alpha<1 feeds differ", async () => {
    const sid = await loadedSession();
    await api.putBindings(sid, toJson(clickPairs(fromJson({ pairs: [], bind_root_velocity: true }))));

    const feedFor = async (alpha: number, seed: number): Promise<string> => {
      await api.putConfig(sid, { alpha, seed });
      const job = await api.transfer(sid);
      expect(job.status).toBe("done");
      return api.framesRaw(sid, 0, job.frames);
    };

    const lockedA = await feedFor(1.0, 0);
    const lockedB = await feedFor(1.0, 12345);
    expect(lockedA.length).toBeGreaterThan(0);
    expect(lockedA === lockedB).toBe(true);

    // the single-frame feed is a strict slice of the full feed
    const headline = await api.frames(sid, 0, 1);
    expect(headline.result.frames[0]).toEqual(JSON.parse(lockedB).result.frames[0]);

    const looseA = await feedFor(0.85, 0);
    const looseB = await feedFor(0.85, 12345);
    expect(looseA === looseB).toBe(false);
  });
});
