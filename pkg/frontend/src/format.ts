// Presentation-only helpers. Scores and ranks come from the server
// verbatim; nothing here recomputes them.

export function formatTimestamp(iso: string | null | undefined): string {
  if (!iso) return "—";
  const date = new Date(iso);
  if (Number.isNaN(date.getTime())) return iso;
  return date.toISOString().replace("T", " ").slice(0, 19) + " UTC";
}

export function formatScore(value: number): string {
  // render the server's number without re-rounding surprises
  return Object.is(value, -0) ? "0" : String(value);
}

export function formatMetrics(metrics: Record<string, number>): string {
  const keys = Object.keys(metrics).sort();
  return keys.map((k) => `${k}=${formatScore(metrics[k])}`).join("  ");
}

export function statusBadge(status: string): string {
  const known = new Set([
    "queued",
    "running",
    "succeeded",
    "failed",
    "healthy",
    "unhealthy",
    "starting",
    "stopped",
    "pass",
    "fail",
  ]);
  return known.has(status) ? status : `unknown(${status})`;
}

export function phaseLabel(current: string | undefined): string {
  if (!current || current === "closed") return "closed";
  return `open: ${current}`;
}

/** Model path used in URLs; the name itself contains slashes. */
export function modelPath(name: string, version: number): string {
  return `${name}/${version}`;
}

export function parseModelPath(path: string): { name: string; version: number } | null {
  const parts = path.split("/").filter((segment) => segment.length > 0);
  if (parts.length < 2) return null;
  const version = Number(parts[parts.length - 1]);
  if (!Number.isInteger(version) || version < 1) return null;
  return { name: parts.slice(0, -1).join("/"), version };
}
