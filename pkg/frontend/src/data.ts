/** Readers for the clockdm output files the figures consume. */

import { readFileSync } from "fs";

import {
  ExclusionPoint,
  OverlayCurve,
  SensitivityRecord,
  Series,
  SUPPORTED_SCHEMA_VERSION,
} from "./types.js";

const REQUIRED_FIELDS = [
  "schema_version",
  "f_dm",
  "scheme",
  "t_p",
  "t_m",
  "sigma_ln",
  "n_measurements",
  "bound_95",
] as const;

/** Parse a clockdm results JSONL file, validating the schema version. */
export function readResults(path: string): SensitivityRecord[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`no result records in ${path}`);
  }
  return lines.map((line, i) => {
    let parsed: Record<string, unknown>;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${i + 1}: not valid JSON`);
    }
    for (const field of REQUIRED_FIELDS) {
      if (!(field in parsed)) {
        throw new Error(
          `${path}:${i + 1}: schema mismatch, missing field "${field}"`,
        );
      }
    }
    if (parsed.schema_version !== SUPPORTED_SCHEMA_VERSION) {
      throw new Error(
        `${path}:${i + 1}: schema version ${parsed.schema_version} != ` +
          `supported ${SUPPORTED_SCHEMA_VERSION}`,
      );
    }
    return parsed as unknown as SensitivityRecord;
  });
}

const SCHEME_COLORS: Record<string, string> = {
  ds: "#1f77b4",
  nbdd: "#d62728",
  bbdd: "#2ca02c",
};

const SCHEME_MARKERS: Record<string, Series["marker"]> = {
  ds: "circle",
  nbdd: "square",
  bbdd: "triangle",
};

/**
 * Group records into one series per (scheme, sigma_ln).
 *
 * Noise levels are distinguished by marker fill: the lowest sigma in the
 * data is filled, higher ones open.
 */
export function sensitivitySeries(records: SensitivityRecord[]): Series[] {
  const groups = new Map<string, SensitivityRecord[]>();
  for (const rec of records) {
    const key = `${rec.scheme}|${rec.sigma_ln}`;
    const list = groups.get(key) ?? [];
    list.push(rec);
    groups.set(key, list);
  }
  const sigmas = [...new Set(records.map((r) => r.sigma_ln))].sort(
    (a, b) => a - b,
  );
  const keys = [...groups.keys()].sort();
  return keys.map((key) => {
    const recs = groups.get(key)!.slice().sort((a, b) => a.f_dm - b.f_dm);
    const { scheme, sigma_ln } = recs[0];
    const sigmaLabel =
      sigma_ln > 0 ? `sigma_LN = ${sigma_ln.toExponential(0)}` : "no laser noise";
    return {
      label: `${scheme.toUpperCase()}, ${sigmaLabel}`,
      x: recs.map((r) => r.f_dm),
      y: recs.map((r) => r.bound_95),
      color: SCHEME_COLORS[scheme] ?? "#555555",
      marker: SCHEME_MARKERS[scheme] ?? "circle",
      filled: sigmas.indexOf(sigma_ln) <= 0,
      line: true,
    };
  });
}

/** Parse a two-column (m_phi_ev, d_e) CSV produced by `clockdm export --exclusion`. */
export function readExclusionCsv(path: string): ExclusionPoint[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 2 || !lines[0].startsWith("m_phi_ev")) {
    throw new Error(
      `${path}: expected an exclusion CSV with header "m_phi_ev,d_e"`,
    );
  }
  return lines.slice(1).map((line, i) => {
    const [m, d] = line.split(",").map(Number);
    if (!isFinite(m) || !isFinite(d)) {
      throw new Error(`${path}:${i + 2}: non-numeric exclusion row`);
    }
    return { m_phi_ev: m, d_e: d };
  });
}

/**
 * Parse overlay curves (other experiments) from a long-format CSV with
 * header "experiment,m_phi_ev,d_e".
 */
export function readOverlays(path: string): OverlayCurve[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 2 || !lines[0].startsWith("experiment")) {
    throw new Error(
      `${path}: expected an overlay CSV with header "experiment,m_phi_ev,d_e"`,
    );
  }
  const curves = new Map<string, ExclusionPoint[]>();
  for (const line of lines.slice(1)) {
    const comma = line.indexOf(",");
    const name = line.slice(0, comma);
    const [m, d] = line.slice(comma + 1).split(",").map(Number);
    if (!name || !isFinite(m) || !isFinite(d)) {
      throw new Error(`${path}: malformed overlay row "${line}"`);
    }
    const pts = curves.get(name) ?? [];
    pts.push({ m_phi_ev: m, d_e: d });
    curves.set(name, pts);
  }
  return [...curves.entries()].map(([name, points]) => ({
    name,
    points: points.slice().sort((a, b) => a.m_phi_ev - b.m_phi_ev),
  }));
}
