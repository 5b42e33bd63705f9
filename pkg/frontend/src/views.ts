// Page renderers. Each returns an optional cleanup callback (used to stop
// polling when the route changes). Every value shown is server-provided;
// rows are rendered in exactly the order the API returned them.

import {
  api,
  ApiError,
  Identity,
  LeaderboardRow,
  ModelDetail,
  ModelRow,
  setToken,
  SubmissionView,
  templateUrl,
  uploadBundle,
} from "./api.js";
import { clear, el } from "./dom.js";
import {
  formatMetrics,
  formatScore,
  formatTimestamp,
  modelPath,
  phaseLabel,
  statusBadge,
} from "./format.js";

export const LEADERBOARD_POLL_MS = 10_000;
export const SUBMISSION_POLL_MS = 2_000;

export type Cleanup = () => void;

export interface Session {
  identity: Identity | null;
}

let authErrorHandler: (() => void) | null = null;

/** Called for every rendered 401 so the app can fall back to the login prompt. */
export function setAuthErrorHandler(handler: (() => void) | null): void {
  authErrorHandler = handler;
}

export function errorBanner(error: unknown): HTMLElement {
  if (error instanceof ApiError) {
    if (error.status === 401 && authErrorHandler) {
      const handler = authErrorHandler;
      setTimeout(() => handler(), 0);
    }
    return el(
      "div",
      { class: "banner error", "data-code": error.code },
      `${error.code}: ${error.message}`,
    );
  }
  return el("div", { class: "banner error" }, String(error));
}

function isMutator(session: Session): boolean {
  const role = session.identity?.role;
  return role === "organizer" || role === "product_team";
}

function loading(): HTMLElement {
  return el("p", { class: "loading" }, "loading…");
}

// -- login ---------------------------------------------------------------------

export function renderLogin(
  root: HTMLElement,
  session: Session,
  onSignedIn: () => void,
): Cleanup {
  clear(root);
  const input = el("input", {
    type: "password",
    placeholder: "paste your access token",
    class: "token-input",
    id: "token-input",
  });
  const message = el("div", { class: "login-message" });
  const button = el(
    "button",
    {
      class: "primary",
      onclick: async () => {
        setToken((input as HTMLInputElement).value.trim());
        try {
          session.identity = await api.me();
          onSignedIn();
        } catch (error) {
          setToken(null);
          session.identity = null;
          clear(message);
          message.append(errorBanner(error));
        }
      },
    },
    "Sign in",
  );
  root.append(
    el(
      "div",
      { class: "login card" },
      el("h1", {}, "forge"),
      el("p", {}, "Sign in with the token an organizer minted for you."),
      input,
      button,
      message,
    ),
  );
  return () => undefined;
}

// -- competitions --------------------------------------------------------------

export function renderCompetitions(root: HTMLElement): Cleanup {
  clear(root);
  root.append(el("h1", {}, "Competitions"), loading());
  api
    .competitions()
    .then((competitions) => {
      clear(root);
      root.append(el("h1", {}, "Competitions"));
      if (competitions.length === 0) {
        root.append(el("p", {}, "No competitions yet."));
        return;
      }
      const list = el("div", { class: "cards" });
      for (const competition of competitions) {
        list.append(
          el(
            "div",
            { class: "card competition" },
            el(
              "h2",
              {},
              el(
                "a",
                { href: `#/competitions/${competition.competition_id}` },
                competition.title || competition.competition_id,
              ),
            ),
            el("p", {}, competition.description),
            el(
              "p",
              { class: "meta" },
              `metric: ${competition.primary_metric} (${competition.direction})`,
            ),
            el(
              "a",
              { href: `#/competitions/${competition.competition_id}/leaderboard` },
              "leaderboard",
            ),
          ),
        );
      }
      root.append(list);
    })
    .catch((error) => {
      clear(root);
      root.append(errorBanner(error));
    });
  return () => undefined;
}

// -- competition detail + submit form --------------------------------------------

export function renderCompetitionDetail(root: HTMLElement, id: string): Cleanup {
  clear(root);
  root.append(loading());
  api
    .competition(id)
    .then((competition) => {
      clear(root);
      const quota = competition.remaining_submissions;
      const phases = el("table", { class: "phases" });
      phases.append(
        el(
          "tr",
          {},
          el("th", {}, "phase"),
          el("th", {}, "opens"),
          el("th", {}, "closes"),
        ),
      );
      for (const phase of competition.phases) {
        phases.append(
          el(
            "tr",
            {},
            el("td", {}, phase.phase_id),
            el("td", {}, formatTimestamp(phase.opens_at)),
            el("td", {}, formatTimestamp(phase.closes_at)),
          ),
        );
      }

      const progress = el("progress", { max: "1", value: "0", class: "hidden" });
      const message = el("div", { class: "submit-message" });
      const fileInput = el("input", { type: "file", accept: ".zip" });
      const quotaExhausted = typeof quota === "number" && quota <= 0;
      const submitButton = el(
        "button",
        {
          class: "primary",
          onclick: async () => {
            const file = (fileInput as HTMLInputElement).files?.[0];
            if (!file) return;
            progress.classList.remove("hidden");
            clear(message);
            try {
              const record = await uploadBundle(id, file, (fraction) => {
                (progress as HTMLProgressElement).value = fraction;
              });
              location.hash = `#/submissions/${record.eval_id}`;
            } catch (error) {
              progress.classList.add("hidden");
              message.append(errorBanner(error));
              if (error instanceof ApiError && error.code === "QUOTA_EXHAUSTED") {
                (submitButton as HTMLButtonElement).disabled = true;
              }
            }
          },
        },
        "Submit bundle",
      ) as HTMLButtonElement;
      if (quotaExhausted) submitButton.disabled = true;

      root.append(
        el("h1", {}, competition.title || id),
        el("p", { class: "meta" }, phaseLabel(competition.current_phase)),
        el("p", {}, competition.description),
        competition.reward_text
          ? el("p", { class: "reward" }, `reward: ${competition.reward_text}`)
          : el("span", { class: "hidden" }),
        phases,
        el(
          "p",
          {},
          el(
            "a",
            { href: templateUrl(id), class: "template-link" },
            "download starter template",
          ),
        ),
        el(
          "div",
          { class: "card submit-form" },
          el("h2", {}, "Submit"),
          el(
            "p",
            { class: "quota" },
            quota === null || quota === undefined
              ? "submissions today: quota shown after your first submission"
              : `submissions remaining today: ${quota}`,
          ),
          fileInput,
          submitButton,
          progress,
          message,
        ),
      );
    })
    .catch((error) => {
      clear(root);
      root.append(errorBanner(error));
    });
  return () => undefined;
}

// -- leaderboard -------------------------------------------------------------------

export function leaderboardTable(rows: LeaderboardRow[]): HTMLElement {
  const table = el("table", { class: "leaderboard", id: "leaderboard" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "rank"),
      el("th", {}, "team"),
      el("th", {}, "best score"),
      el("th", {}, "submissions"),
      el("th", {}, "best at"),
    ),
  );
  for (const row of rows) {
    // order is the server's; never re-sorted client-side
    table.append(
      el(
        "tr",
        { class: "entry" },
        el("td", {}, String(row.rank)),
        el("td", {}, row.team_id),
        el("td", {}, formatScore(row.best_score)),
        el("td", {}, String(row.submission_count)),
        el("td", {}, formatTimestamp(row.best_at)),
      ),
    );
  }
  return table;
}

export function renderLeaderboard(root: HTMLElement, id: string): Cleanup {
  clear(root);
  const heading = el("h1", {}, `Leaderboard — ${id}`);
  const holder = el("div", {}, loading());
  root.append(heading, holder);

  const refresh = () =>
    api
      .leaderboard(id)
      .then((rows) => {
        clear(holder);
        holder.append(
          rows.length ? leaderboardTable(rows) : el("p", {}, "No scored submissions yet."),
        );
      })
      .catch((error) => {
        clear(holder);
        holder.append(errorBanner(error));
      });

  void refresh();
  const timer = setInterval(refresh, LEADERBOARD_POLL_MS);
  return () => clearInterval(timer);
}

// -- submission status ----------------------------------------------------------------

export function submissionCard(record: SubmissionView): HTMLElement {
  const terminal = record.status === "succeeded" || record.status === "failed";
  return el(
    "div",
    { class: "card submission", "data-status": record.status },
    el("h2", {}, `Submission ${record.eval_id}`),
    el("p", { class: `status ${record.status}` }, `status: ${statusBadge(record.status)}`),
    record.status === "failed"
      ? el("p", { class: "error-class" }, `error class: ${record.error_class}`)
      : null,
    terminal && record.status === "succeeded"
      ? el("p", { class: "metrics" }, formatMetrics(record.metrics))
      : null,
    record.log_tail
      ? el(
          "details",
          {},
          el("summary", {}, "stderr tail"),
          el("pre", { class: "log-tail" }, record.log_tail),
        )
      : null,
    el("p", { class: "meta" }, `submitted ${formatTimestamp(record.created_at)}`),
  );
}

export function renderSubmission(root: HTMLElement, id: string): Cleanup {
  clear(root);
  const holder = el("div", {}, loading());
  root.append(el("h1", {}, "Submission"), holder);
  let timer: ReturnType<typeof setInterval> | null = null;

  const refresh = () =>
    api
      .submission(id)
      .then((record) => {
        clear(holder);
        holder.append(submissionCard(record));
        if (
          (record.status === "succeeded" || record.status === "failed") &&
          timer !== null
        ) {
          clearInterval(timer);
          timer = null;
        }
      })
      .catch((error) => {
        clear(holder);
        holder.append(errorBanner(error));
        if (timer !== null) {
          clearInterval(timer);
          timer = null;
        }
      });

  void refresh();
  timer = setInterval(refresh, SUBMISSION_POLL_MS);
  return () => {
    if (timer !== null) clearInterval(timer);
  };
}

// -- models dashboard --------------------------------------------------------------------

function stageActions(
  model: ModelRow,
  session: Session,
  rerender: () => void,
  message: HTMLElement,
): HTMLElement {
  const actions = el("span", { class: "actions" });
  if (!isMutator(session)) return actions; // mirrors the server's role gate
  const act = (label: string, call: () => Promise<unknown>) =>
    el(
      "button",
      {
        class: "action",
        onclick: async () => {
          clear(message);
          try {
            await call();
            rerender();
          } catch (error) {
            message.append(errorBanner(error));
          }
        },
      },
      label,
    );
  if (model.stage === "harvested") {
    actions.append(
      act("promote to validated", () =>
        api.promote(model.model_name, model.version, "validated"),
      ),
    );
  }
  if (model.stage === "validated") {
    actions.append(
      act("promote to serving", () =>
        api.promote(model.model_name, model.version, "serving"),
      ),
    );
  }
  if (model.stage === "serving") {
    actions.append(
      act("serve", () => api.serve(model.model_name, model.version)),
    );
  }
  if (model.stage !== "archived") {
    actions.append(
      act("archive", () => api.promote(model.model_name, model.version, "archived")),
    );
  }
  return actions;
}

export function renderModels(root: HTMLElement, session: Session): Cleanup {
  clear(root);
  root.append(el("h1", {}, "Model registry"), loading());

  const rerender = () => renderModels(root, session);

  Promise.all([api.models(), api.dashboard()])
    .then(([models, dashboard]) => {
      clear(root);
      root.append(el("h1", {}, "Model registry"));
      const message = el("div", { class: "dashboard-message" });
      root.append(message);

      if (isMutator(session)) {
        const bundleInput = el("input", {
          type: "text",
          placeholder: "bundle id to harvest",
          class: "harvest-input",
        });
        root.append(
          el(
            "div",
            { class: "card harvest" },
            bundleInput,
            el(
              "button",
              {
                class: "action harvest-button",
                onclick: async () => {
                  clear(message);
                  try {
                    await api.harvest((bundleInput as HTMLInputElement).value.trim());
                    rerender();
                  } catch (error) {
                    message.append(errorBanner(error));
                  }
                },
              },
              "harvest",
            ),
          ),
        );
      }

      const health = new Map(
        dashboard.map((row) => [
          `${row.service.model_name}/${row.service.version}`,
          row.service.status,
        ]),
      );
      const table = el("table", { class: "models" });
      table.append(
        el(
          "tr",
          {},
          el("th", {}, "model"),
          el("th", {}, "version"),
          el("th", {}, "stage"),
          el("th", {}, "metrics"),
          el("th", {}, "health"),
          el("th", {}, "actions"),
        ),
      );
      for (const model of models) {
        const key = modelPath(model.model_name, model.version);
        const metricCell = el("td", { class: "metrics" });
        for (const [dataset, metrics] of Object.entries(model.metrics)) {
          metricCell.append(
            el("div", {}, `${dataset}: ${formatMetrics(metrics)}`),
          );
        }
        table.append(
          el(
            "tr",
            { class: "model-row", "data-model": key },
            el("td", {}, el("a", { href: `#/models/${key}` }, model.model_name)),
            el("td", {}, String(model.version)),
            el("td", { class: `stage ${model.stage}` }, model.stage),
            metricCell,
            el("td", { class: "health" }, health.get(key) ?? "—"),
            el("td", {}, stageActions(model, session, rerender, message)),
          ),
        );
      }
      root.append(table);
      if (models.length === 0) root.append(el("p", {}, "Nothing harvested yet."));
    })
    .catch((error) => {
      clear(root);
      root.append(errorBanner(error));
    });
  return () => undefined;
}

// -- model detail + try it ------------------------------------------------------------------

function gateReportSection(detail: ModelDetail): HTMLElement {
  if (!detail.gate_report) {
    return el("p", { class: "gate none" }, "No gate report yet (runs at promotion).");
  }
  const report = detail.gate_report;
  const section = el(
    "div",
    { class: "card gate" },
    el("h2", {}, "Gate report"),
    el(
      "p",
      { class: `verdict ${report.verdict}` },
      `verdict: ${statusBadge(report.verdict)} (scanned ${formatTimestamp(report.scanned_at)})`,
    ),
  );
  if (report.findings.length) {
    const table = el("table", { class: "findings" });
    table.append(
      el(
        "tr",
        {},
        el("th", {}, "rule"),
        el("th", {}, "severity"),
        el("th", {}, "path"),
        el("th", {}, "line"),
        el("th", {}, "excerpt"),
      ),
    );
    for (const finding of report.findings) {
      table.append(
        el(
          "tr",
          { class: `finding ${finding.severity}` },
          el("td", {}, finding.rule_id),
          el("td", {}, finding.severity),
          el("td", {}, finding.path),
          el("td", {}, finding.line === undefined ? "—" : String(finding.line)),
          el("td", {}, finding.excerpt),
        ),
      );
    }
    section.append(table);
  } else {
    section.append(el("p", {}, "No findings."));
  }
  return section;
}

export function renderModelDetail(
  root: HTMLElement,
  name: string,
  version: number,
): Cleanup {
  clear(root);
  root.append(loading());
  api
    .modelDetail(name, version)
    .then((detail) => {
      clear(root);
      const output = el("pre", { class: "try-output", id: "try-output" });
      const input = el("textarea", {
        class: "try-input",
        id: "try-input",
        rows: "3",
        placeholder: 'JSON input value, e.g. 7 or {"text": "hi"}',
      });
      const tryButton = el(
        "button",
        {
          class: "primary try-button",
          onclick: async () => {
            clear(output);
            let value: unknown;
            try {
              value = JSON.parse((input as HTMLTextAreaElement).value);
            } catch {
              output.append("input is not valid JSON");
              return;
            }
            try {
              const result = await api.predict(name, version, value);
              output.append(JSON.stringify(result.output));
            } catch (error) {
              output.append(
                error instanceof ApiError
                  ? `${error.code}: ${error.message}`
                  : String(error),
              );
            }
          },
        },
        "Invoke",
      );

      const history = el("table", { class: "history" });
      history.append(
        el(
          "tr",
          {},
          el("th", {}, "dataset"),
          el("th", {}, "metrics"),
          el("th", {}, "logged at"),
        ),
      );
      for (const entry of detail.metrics_history) {
        history.append(
          el(
            "tr",
            {},
            el("td", {}, entry.dataset_id),
            el("td", {}, formatMetrics(entry.metrics)),
            el("td", {}, formatTimestamp(entry.at)),
          ),
        );
      }

      root.append(
        el("h1", {}, `${name} v${version}`),
        el("p", { class: `stage ${detail.stage}` }, `stage: ${detail.stage}`),
        detail.service
          ? el(
              "p",
              { class: "service" },
              `service: ${detail.service.status} at ${detail.service.route}`,
            )
          : el("p", { class: "service" }, "service: not materialized"),
        gateReportSection(detail),
        el(
          "div",
          { class: "card metrics-history" },
          el("h2", {}, "Metrics over time"),
          detail.metrics_history.length ? history : el("p", {}, "No re-evaluations yet."),
        ),
        el(
          "div",
          { class: "card try-it" },
          el("h2", {}, "Try it"),
          input,
          tryButton,
          output,
        ),
      );
    })
    .catch((error) => {
      clear(root);
      root.append(errorBanner(error));
    });
  return () => undefined;
}
