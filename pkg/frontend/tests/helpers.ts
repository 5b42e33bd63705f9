import { vi } from "vitest";

export type RouteTable = Record<
  string,
  { status?: number; body: unknown } | ((init?: RequestInit) => { status?: number; body: unknown })
>;

/** Install a fetch stub keyed by "METHOD path" (path includes /api/v1...). */
export function stubFetch(routes: RouteTable): { calls: string[] } {
  const calls: string[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      const method = init?.method ?? "GET";
      const path = String(url);
      const key = `${method} ${path}`;
      calls.push(key);
      const route = routes[key];
      if (!route) {
        return new Response(
          JSON.stringify({ error: { code: "UNKNOWN_ROUTE", message: key } }),
          { status: 404, headers: { "content-type": "application/json" } },
        );
      }
      const result = typeof route === "function" ? route(init) : route;
      return new Response(JSON.stringify(result.body), {
        status: result.status ?? 200,
        headers: { "content-type": "application/json" },
      });
    }),
  );
  return { calls };
}

export function mount(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("main");
  document.body.append(root);
  return root;
}

export async function flush(times = 4): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export class FakeXHR {
  static last: FakeXHR | null = null;

  upload: { onprogress: ((event: ProgressEvent) => void) | null } = {
    onprogress: null,
  };
  status = 0;
  responseText = "";
  onload: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onabort: (() => void) | null = null;
  headers: Record<string, string> = {};
  opened: [string, string] | null = null;
  body: FormData | null = null;

  open(method: string, url: string): void {
    this.opened = [method, url];
    FakeXHR.last = this;
  }

  setRequestHeader(key: string, value: string): void {
    this.headers[key] = value;
  }

  send(body: FormData): void {
    this.body = body;
  }

  respond(status: number, payload: unknown): void {
    this.status = status;
    this.responseText = JSON.stringify(payload);
    this.upload.onprogress?.({
      lengthComputable: true,
      loaded: 10,
      total: 10,
    } as ProgressEvent);
    this.onload?.();
  }
}

export function stubXHR(): void {
  FakeXHR.last = null;
  vi.stubGlobal("XMLHttpRequest", FakeXHR as unknown as typeof XMLHttpRequest);
}
