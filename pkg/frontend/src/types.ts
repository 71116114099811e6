/** Data shapes shared across the figure scripts. */

/** One grid point of a clockdm sensitivity scan (one JSONL line). */
export interface SensitivityRecord {
  schema_version: number;
  f_dm: number;
  scheme: string;
  t_p: number;
  t_m: number;
  sigma_ln: number;
  n_measurements: number;
  bound_95: number;
}

/** One point of an exclusion curve (simulated or from another experiment). */
export interface ExclusionPoint {
  m_phi_ev: number;
  d_e: number;
}

export interface OverlayCurve {
  name: string;
  points: ExclusionPoint[];
}

/** A plotted series: points plus how to draw them. */
export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  marker: "circle" | "square" | "triangle";
  filled: boolean;
  line: boolean;
  dashed?: boolean;
}

export const SUPPORTED_SCHEMA_VERSION = 1;
