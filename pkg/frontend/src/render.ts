/** Figure assembly and output in svg/png/pdf. */

import { writeFileSync } from "fs";

import { Resvg } from "@resvg/resvg-js";

import { logLogChart, Scene } from "./chart.js";
import { sensitivitySeries } from "./data.js";
import { sceneToPdf } from "./pdf.js";
import { sceneToSvg } from "./svg.js";
import { OverlayCurve, ExclusionPoint, SensitivityRecord, Series } from "./types.js";

export type Format = "svg" | "png" | "pdf";

const DEJAVU = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf";

export function sensitivityScene(records: SensitivityRecord[]): Scene {
  return logLogChart({
    title: "Smallest detectable oscillation amplitude vs Compton frequency",
    xLabel: "f_DM (Hz)",
    yLabel: "95% detectable amplitude",
    series: sensitivitySeries(records),
  });
}

const OVERLAY_COLORS = [
  "#7f7f7f",
  "#8c564b",
  "#9467bd",
  "#e377c2",
  "#17becf",
  "#bcbd22",
];

export function exclusionScene(
  simulated: ExclusionPoint[],
  overlays: OverlayCurve[],
): Scene {
  const series: Series[] = [
    {
      label: "simulated nuclear clock",
      x: simulated.map((p) => p.m_phi_ev),
      y: simulated.map((p) => p.d_e),
      color: "#2ca02c",
      marker: "circle",
      filled: true,
      line: true,
    },
  ];
  overlays.forEach((curve, i) => {
    series.push({
      label: curve.name,
      x: curve.points.map((p) => p.m_phi_ev),
      y: curve.points.map((p) => p.d_e),
      color: OVERLAY_COLORS[i % OVERLAY_COLORS.length],
      marker: "circle",
      filled: false,
      line: true,
      dashed: true,
    });
  });
  return logLogChart({
    title: "Scalar-photon coupling exclusion",
    xLabel: "m_phi (eV)",
    yLabel: "d_e",
    series,
  });
}

export function renderScene(scene: Scene, format: Format): Buffer {
  const svg = sceneToSvg(scene);
  if (format === "svg") {
    return Buffer.from(svg, "utf8");
  }
  if (format === "pdf") {
    return sceneToPdf(scene);
  }
  const resvg = new Resvg(svg, {
    font: {
      loadSystemFonts: false,
      fontFiles: [DEJAVU],
      defaultFontFamily: "DejaVu Sans",
    },
    fitTo: { mode: "zoom", value: 2 },
  });
  return Buffer.from(resvg.render().asPng());
}

export function writeScene(scene: Scene, outPath: string, format: Format): void {
  writeFileSync(outPath, renderScene(scene, format));
}
