/**
 * Thin client for the propagation service's JSON API.  Payload construction
 * is pure; the network call keeps at most one request in flight and lets a
 * newer click replace a queued one.
 */

import { AnnotationState } from "./model.js";

export interface PropagateRequest {
  width: number;
  height: number;
  numClasses: number;
  entries: { x: number; y: number; class: number }[];
  boundary?: number[];
  alpha?: number;
}

export interface PropagateResponse {
  p: number[]; // row-major, class index fastest
  map: number[];
  entropy: number[];
  weights: number[];
  unreached: number[];
  solveMillis: number;
}

export function buildPayload(state: AnnotationState, alpha = 1.0): PropagateRequest {
  const req: PropagateRequest = {
    width: state.width,
    height: state.height,
    numClasses: state.numClasses,
    entries: state.labelEntries(),
    alpha,
  };
  if (state.hasWalls()) req.boundary = state.boundaryArray();
  return req;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export async function postPropagate(
  baseUrl: string,
  req: PropagateRequest,
  fetchFn: typeof fetch = fetch,
): Promise<PropagateResponse> {
  const resp = await fetchFn(`${baseUrl}/api/propagate`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(req),
  });
  if (!resp.ok) {
    let message = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      if (body && typeof body.error === "string") message = body.error;
    } catch {
      /* keep the status message */
    }
    throw new ApiError(resp.status, message);
  }
  return (await resp.json()) as PropagateResponse;
}

type Job<T> = { run: () => Promise<T>; resolve: (v: T) => void; reject: (e: unknown) => void };

/**
 * Serializes async jobs with queue-replace semantics: while one job runs,
 * only the most recently submitted job waits; older waiters are rejected.
 */
export class RequestGate<T> {
  private inFlight = false;
  private pending: Job<T> | null = null;

  submit(run: () => Promise<T>): Promise<T> {
    return new Promise<T>((resolve, reject) => {
      if (this.inFlight) {
        if (this.pending) this.pending.reject(new Error("replaced"));
        this.pending = { run, resolve, reject };
        return;
      }
      this.start({ run, resolve, reject });
    });
  }

  private start(job: Job<T>): void {
    this.inFlight = true;
    job
      .run()
      .then(job.resolve, job.reject)
      .finally(() => {
        this.inFlight = false;
        const next = this.pending;
        this.pending = null;
        if (next) this.start(next);
      });
  }
}
