import { describe, expect, it } from "vitest";

import {
  formatMetrics,
  formatScore,
  formatTimestamp,
  parseModelPath,
  phaseLabel,
} from "../src/format.js";

describe("formatScore", () => {
  it("renders the server's number verbatim", () => {
    expect(formatScore(0.75)).toBe("0.75");
    expect(formatScore(1)).toBe("1");
    expect(formatScore(0.7333333333333334)).toBe("0.7333333333333334");
  });
});

describe("formatMetrics", () => {
  it("sorts keys for stable display", () => {
    expect(formatMetrics({ rmse: 1.5, accuracy: 0.9 })).toBe(
      "accuracy=0.9  rmse=1.5",
    );
  });
});

describe("formatTimestamp", () => {
  it("handles missing values and renders UTC", () => {
    expect(formatTimestamp(null)).toBe("—");
    expect(formatTimestamp("2026-08-08T12:00:00.000000+00:00")).toBe(
      "2026-08-08 12:00:00 UTC",
    );
  });
});

describe("parseModelPath", () => {
  it("splits slash-bearing model names from the version", () => {
    expect(parseModelPath("compA/teamX/3")).toEqual({
      name: "compA/teamX",
      version: 3,
    });
  });
  it("rejects paths without a numeric trailing version", () => {
    expect(parseModelPath("compA/teamX")).toBeNull();
    expect(parseModelPath("3")).toBeNull();
    expect(parseModelPath("compA/teamX/0")).toBeNull();
  });
});

describe("phaseLabel", () => {
  it("labels open and closed phases", () => {
    expect(phaseLabel("main")).toBe("open: main");
    expect(phaseLabel("closed")).toBe("closed");
    expect(phaseLabel(undefined)).toBe("closed");
  });
});
