import { describe, expect, it } from "vitest";

import { ApiError, RequestGate, buildPayload, postPropagate } from "../src/api.js";
import { AnnotationState, WALL_CLASS } from "../src/model.js";

describe("buildPayload", () => {
  it("mirrors the labels-file shape and omits an all-zero boundary", () => {
    const s = new AnnotationState(3, 1, 2);
    s.applyStroke({ classId: 0, pixels: [{ x: 0, y: 0 }], brushRadius: 0 });
    s.applyStroke({ classId: 1, pixels: [{ x: 2, y: 0 }], brushRadius: 0 });
    const req = buildPayload(s);
    expect(req).toEqual({
      width: 3,
      height: 1,
      numClasses: 2,
      entries: [
        { x: 0, y: 0, class: 0 },
        { x: 2, y: 0, class: 1 },
      ],
      alpha: 1.0,
    });
  });

  it("includes the painted boundary row-major", () => {
    const s = new AnnotationState(2, 2, 2);
    s.applyStroke({ classId: 0, pixels: [{ x: 0, y: 0 }], brushRadius: 0 });
    s.applyStroke({ classId: WALL_CLASS, pixels: [{ x: 1, y: 0 }], brushRadius: 0 });
    expect(buildPayload(s).boundary).toEqual([0, 10.0, 0, 0]);
  });
});

describe("postPropagate", () => {
  it("surfaces the server's error message on non-2xx", async () => {
    const fakeFetch = (async () =>
      new Response(JSON.stringify({ error: "no absorbing pixels" }), {
        status: 422,
      })) as typeof fetch;
    await expect(
      postPropagate("http://x", { width: 1, height: 1, numClasses: 1, entries: [] }, fakeFetch),
    ).rejects.toMatchObject({ status: 422, message: "no absorbing pixels" });
  });

  it("falls back to the status code when the body is not JSON", async () => {
    const fakeFetch = (async () => new Response("boom", { status: 500 })) as typeof fetch;
    const err = await postPropagate(
      "http://x",
      { width: 1, height: 1, numClasses: 1, entries: [] },
      fakeFetch,
    ).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.message).toBe("HTTP 500");
  });
});

describe("RequestGate", () => {
  it("runs at most one job and queue-replaces pending ones", async () => {
    const gate = new RequestGate<number>();
    let release!: () => void;
    const first = gate.submit(
      () => new Promise<number>((res) => (release = () => res(1))),
    );
    const second = gate.submit(async () => 2);
    const third = gate.submit(async () => 3);
    await expect(second).rejects.toThrow("replaced");
    release();
    expect(await first).toBe(1);
    expect(await third).toBe(3);
  });
});
