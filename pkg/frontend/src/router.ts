// Hash router. Model names contain slashes, so model routes are parsed by
// taking everything between the prefix and the trailing version segment.

import { api, getToken, setToken } from "./api.js";
import { clear, el } from "./dom.js";
import { parseModelPath } from "./format.js";
import {
  Cleanup,
  renderCompetitionDetail,
  renderCompetitions,
  renderLeaderboard,
  renderLogin,
  renderModelDetail,
  renderModels,
  renderSubmission,
  Session,
  errorBanner,
  setAuthErrorHandler,
} from "./views.js";

export class Router {
  private cleanup: Cleanup | null = null;
  readonly session: Session = { identity: null };

  constructor(
    private readonly nav: HTMLElement,
    private readonly outlet: HTMLElement,
  ) {}

  async start(): Promise<void> {
    setAuthErrorHandler(() => {
      setToken(null);
      this.session.identity = null;
      location.hash = "#/login";
      this.render();
    });
    if (getToken()) {
      try {
        this.session.identity = await api.me();
      } catch {
        setToken(null);
      }
    }
    window.addEventListener("hashchange", () => this.render());
    this.render();
  }

  private renderNav(): void {
    clear(this.nav);
    const identity = this.session.identity;
    this.nav.append(
      el("a", { href: "#/competitions", class: "brand" }, "forge"),
      el("a", { href: "#/competitions" }, "competitions"),
    );
    if (identity?.role === "organizer" || identity?.role === "product_team") {
      this.nav.append(el("a", { href: "#/models" }, "models"));
    }
    if (identity) {
      this.nav.append(
        el("span", { class: "who" }, `${identity.display_name} (${identity.role})`),
        el(
          "button",
          {
            class: "signout",
            onclick: () => {
              setToken(null);
              this.session.identity = null;
              location.hash = "#/login";
            },
          },
          "sign out",
        ),
      );
    }
  }

  render(): void {
    if (this.cleanup) {
      this.cleanup();
      this.cleanup = null;
    }
    this.renderNav();
    const route = location.hash.replace(/^#/, "") || "/competitions";

    if (!this.session.identity && route !== "/login") {
      location.hash = "#/login";
      if (route === "/login") return;
    }

    const done = (cleanup: Cleanup | void) => {
      this.cleanup = cleanup ?? null;
    };

    try {
      if (route === "/login" || !this.session.identity) {
        done(
          renderLogin(this.outlet, this.session, () => {
            location.hash = "#/competitions";
            this.render();
          }),
        );
        return;
      }
      if (route === "/competitions") {
        done(renderCompetitions(this.outlet));
        return;
      }
      let match = route.match(/^\/competitions\/([^/]+)\/leaderboard$/);
      if (match) {
        done(renderLeaderboard(this.outlet, decodeURIComponent(match[1])));
        return;
      }
      match = route.match(/^\/competitions\/([^/]+)$/);
      if (match) {
        done(renderCompetitionDetail(this.outlet, decodeURIComponent(match[1])));
        return;
      }
      match = route.match(/^\/submissions\/([^/]+)$/);
      if (match) {
        done(renderSubmission(this.outlet, decodeURIComponent(match[1])));
        return;
      }
      if (route === "/models") {
        done(renderModels(this.outlet, this.session));
        return;
      }
      if (route.startsWith("/models/")) {
        const parsed = parseModelPath(route.slice("/models/".length));
        if (parsed) {
          done(renderModelDetail(this.outlet, parsed.name, parsed.version));
          return;
        }
      }
      clear(this.outlet);
      this.outlet.append(el("p", {}, `no such page: ${route}`));
    } catch (error) {
      clear(this.outlet);
      this.outlet.append(errorBanner(error));
    }
  }
}
