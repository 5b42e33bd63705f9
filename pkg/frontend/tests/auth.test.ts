import { afterEach, describe, expect, it, vi } from "vitest";

import { setToken } from "../src/api.js";
import { renderCompetitions, renderLogin, setAuthErrorHandler } from "../src/views.js";
import { flush, mount, stubFetch } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
  setAuthErrorHandler(null);
  setToken(null);
});

describe("login", () => {
  it("signs in when the token resolves an identity", async () => {
    stubFetch({
      "GET /api/v1/me": {
        body: { principal_id: "pat", display_name: "Pat", role: "participant" },
      },
    });
    const root = mount();
    const session = { identity: null };
    let signedIn = false;
    renderLogin(root, session, () => {
      signedIn = true;
    });
    (root.querySelector("#token-input") as HTMLInputElement).value = "tok";
    (root.querySelector("button.primary") as HTMLButtonElement).click();
    await flush();
    expect(signedIn).toBe(true);
    expect(session.identity).toEqual({
      principal_id: "pat",
      display_name: "Pat",
      role: "participant",
    });
  });

  it("keeps the prompt and shows the code on a bad token", async () => {
    stubFetch({
      "GET /api/v1/me": {
        status: 401,
        body: { error: { code: "UNAUTHENTICATED", message: "unknown token" } },
      },
    });
    const root = mount();
    const session = { identity: null };
    renderLogin(root, session, () => {
      throw new Error("must not sign in");
    });
    (root.querySelector("#token-input") as HTMLInputElement).value = "bad";
    (root.querySelector("button.primary") as HTMLButtonElement).click();
    await flush();
    expect(session.identity).toBeNull();
    expect(
      root.querySelector(".banner.error")?.getAttribute("data-code"),
    ).toBe("UNAUTHENTICATED");
  });
});

describe("401 handling on any page", () => {
  it("invokes the auth handler so the app can show the login prompt", async () => {
    stubFetch({
      "GET /api/v1/competitions": {
        status: 401,
        body: { error: { code: "UNAUTHENTICATED", message: "expired" } },
      },
    });
    const kicked = vi.fn();
    setAuthErrorHandler(kicked);
    const root = mount();
    renderCompetitions(root);
    await flush();
    expect(kicked).toHaveBeenCalled();
  });
});
