import { afterEach, describe, expect, it, vi } from "vitest";

import { renderCompetitionDetail, renderSubmission } from "../src/views.js";
import { FakeXHR, flush, mount, stubFetch, stubXHR } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
  location.hash = "";
});

const COMPETITION = {
  competition_id: "toy",
  title: "Toy challenge",
  description: "predict parity",
  primary_metric: "accuracy",
  direction: "maximize",
  secondary_metrics: [],
  phases: [
    {
      phase_id: "main",
      opens_at: "2026-08-01T00:00:00.000000+00:00",
      closes_at: "2026-09-01T00:00:00.000000+00:00",
    },
  ],
  daily_quota: 5,
  hidden_dataset: "toy-hidden",
  public_dataset: null,
  reward_text: "glory",
  current_phase: "main",
  remaining_submissions: 3,
};

const QUEUED = {
  eval_id: "e123",
  bundle_id: "b456",
  dataset_id: "toy-hidden",
  status: "queued",
  error_class: "none",
  metrics: {},
  wall_time_s: 0,
  log_ref: null,
  started_at: null,
  finished_at: null,
  created_at: "2026-08-08T12:00:00.000000+00:00",
};

async function submitFile(root: HTMLElement): Promise<void> {
  const fileInput = root.querySelector('input[type="file"]') as HTMLInputElement;
  const file = new File([new Uint8Array([80, 75, 3, 4])], "bundle.zip");
  Object.defineProperty(fileInput, "files", { value: [file] });
  (root.querySelector("button.primary") as HTMLButtonElement).click();
  await flush();
}

describe("submission upload", () => {
  it("uploads the bundle and navigates to a visible status page", async () => {
    stubFetch({
      "GET /api/v1/competitions/toy": { body: COMPETITION },
      "GET /api/v1/submissions/e123": {
        body: { ...QUEUED, status: "succeeded", metrics: { accuracy: 0.75 }, log_tail: null },
      },
    });
    stubXHR();
    const root = mount();
    renderCompetitionDetail(root, "toy");
    await flush();
    expect(root.textContent).toContain("submissions remaining today: 3");

    await submitFile(root);
    expect(FakeXHR.last?.opened?.[0]).toBe("POST");
    expect(FakeXHR.last?.opened?.[1]).toContain("/api/v1/competitions/toy/submissions");
    FakeXHR.last?.respond(201, QUEUED);
    await flush();

    // round-trip lands on the submission status page
    expect(location.hash).toBe("#/submissions/e123");
    const cleanup = renderSubmission(mount(), "e123");
    await flush();
    cleanup();
    const card = document.querySelector(".card.submission");
    expect(card?.getAttribute("data-status")).toBe("succeeded");
    expect(card?.textContent).toContain("accuracy=0.75");
  });

  it("disables the form and shows the code after a quota rejection", async () => {
    stubFetch({ "GET /api/v1/competitions/toy": { body: COMPETITION } });
    stubXHR();
    const root = mount();
    renderCompetitionDetail(root, "toy");
    await flush();

    await submitFile(root);
    FakeXHR.last?.respond(429, {
      error: { code: "QUOTA_EXHAUSTED", message: "daily quota of 5 reached" },
    });
    await flush();

    const banner = root.querySelector(".banner.error");
    expect(banner?.getAttribute("data-code")).toBe("QUOTA_EXHAUSTED");
    expect(
      (root.querySelector("button.primary") as HTMLButtonElement).disabled,
    ).toBe(true);
  });

  it("renders the form disabled when the quota is already exhausted", async () => {
    stubFetch({
      "GET /api/v1/competitions/toy": {
        body: { ...COMPETITION, remaining_submissions: 0 },
      },
    });
    const root = mount();
    renderCompetitionDetail(root, "toy");
    await flush();
    expect(
      (root.querySelector("button.primary") as HTMLButtonElement).disabled,
    ).toBe(true);
  });

  it("shows failed submissions with their error class and log tail", async () => {
    stubFetch({
      "GET /api/v1/submissions/e999": {
        body: {
          ...QUEUED,
          eval_id: "e999",
          status: "failed",
          error_class: "protocol_violation",
          log_tail: "Traceback: boom",
        },
      },
    });
    const root = mount();
    const cleanup = renderSubmission(root, "e999");
    await flush();
    cleanup();
    expect(root.textContent).toContain("error class: protocol_violation");
    expect(root.querySelector("pre.log-tail")?.textContent).toBe("Traceback: boom");
  });
});
