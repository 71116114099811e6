/**
 * Scene -> minimal vector PDF.
 *
 * Hand-rolled PDF 1.4 with a single page, an uncompressed content
 * stream and the base-14 Helvetica font, so output is deterministic
 * byte for byte (no creation date, no ids) and needs no dependencies.
 */

import { Element, Scene } from "./chart.js";

function rgb(hex: string): string {
  const v = parseInt(hex.slice(1), 16);
  const f = (x: number) => (x / 255).toFixed(3);
  return `${f((v >> 16) & 255)} ${f((v >> 8) & 255)} ${f(v & 255)}`;
}

function escText(text: string): string {
  return text.replace(/\\/g, "\\\\").replace(/\(/g, "\\(").replace(/\)/g, "\\)");
}

const KAPPA = 0.5522847498;

/** Approximate Helvetica advance width (em fractions) for alignment. */
function textWidth(text: string, size: number): number {
  let w = 0;
  for (const ch of text) {
    if ("iIljt.,:;'|!".includes(ch)) w += 0.28;
    else if ("mwMW".includes(ch)) w += 0.85;
    else if (ch === " ") w += 0.28;
    else w += 0.55;
  }
  return w * size;
}

function draw(el: Element, h: number, out: string[]): void {
  const y = (v: number) => (h - v).toFixed(2);
  const x = (v: number) => v.toFixed(2);
  switch (el.kind) {
    case "rect":
      out.push(`${rgb(el.fill)} rg`);
      out.push(`${x(el.x)} ${y(el.y + el.h)} ${el.w.toFixed(2)} ${el.h.toFixed(2)} re f`);
      break;
    case "line":
      out.push(`${rgb(el.color)} RG ${el.width} w`);
      if (el.dashed) out.push("[5 3] 0 d");
      out.push(`${x(el.x1)} ${y(el.y1)} m ${x(el.x2)} ${y(el.y2)} l S`);
      if (el.dashed) out.push("[] 0 d");
      break;
    case "polyline": {
      out.push(`${rgb(el.color)} RG ${el.width} w`);
      if (el.dashed) out.push("[5 3] 0 d");
      const [first, ...rest] = el.points;
      out.push(`${x(first[0])} ${y(first[1])} m`);
      for (const [px, py] of rest) out.push(`${x(px)} ${y(py)} l`);
      out.push("S");
      if (el.dashed) out.push("[] 0 d");
      break;
    }
    case "circle": {
      const { cx, cy, r } = el;
      const k = KAPPA * r;
      out.push(`${rgb(el.color)} RG 1 w`);
      if (el.filled) out.push(`${rgb(el.color)} rg`);
      else out.push("1 1 1 rg");
      out.push(`${x(cx + r)} ${y(cy)} m`);
      out.push(`${x(cx + r)} ${y(cy - k)} ${x(cx + k)} ${y(cy - r)} ${x(cx)} ${y(cy - r)} c`);
      out.push(`${x(cx - k)} ${y(cy - r)} ${x(cx - r)} ${y(cy - k)} ${x(cx - r)} ${y(cy)} c`);
      out.push(`${x(cx - r)} ${y(cy + k)} ${x(cx - k)} ${y(cy + r)} ${x(cx)} ${y(cy + r)} c`);
      out.push(`${x(cx + k)} ${y(cy + r)} ${x(cx + r)} ${y(cy + k)} ${x(cx + r)} ${y(cy)} c`);
      out.push("B");
      break;
    }
    case "polygon": {
      out.push(`${rgb(el.color)} RG 1 w`);
      if (el.filled) out.push(`${rgb(el.color)} rg`);
      else out.push("1 1 1 rg");
      const [first, ...rest] = el.points;
      out.push(`${x(first[0])} ${y(first[1])} m`);
      for (const [px, py] of rest) out.push(`${x(px)} ${y(py)} l`);
      out.push("h B");
      break;
    }
    case "text": {
      const w = textWidth(el.text, el.size);
      const shift = el.anchor === "middle" ? w / 2 : el.anchor === "end" ? w : 0;
      out.push(`${rgb(el.color)} rg BT /F1 ${el.size} Tf`);
      if (el.rotate) {
        // rotate 90 degrees counterclockwise about the anchor point
        out.push(`0 1 -1 0 ${x(el.x)} ${(h - el.y - shift).toFixed(2)} Tm`);
      } else {
        out.push(`${(el.x - shift).toFixed(2)} ${y(el.y)} Td`);
      }
      out.push(`(${escText(el.text)}) Tj ET`);
      break;
    }
  }
}

export function sceneToPdf(scene: Scene): Buffer {
  const ops: string[] = [];
  for (const el of scene.elements) draw(el, scene.height, ops);
  const stream = ops.join("\n");

  const objects: string[] = [];
  objects.push("<< /Type /Catalog /Pages 2 0 R >>");
  objects.push("<< /Type /Pages /Kids [3 0 R] /Count 1 >>");
  objects.push(
    `<< /Type /Page /Parent 2 0 R /MediaBox [0 0 ${scene.width} ${scene.height}] ` +
      "/Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
  );
  objects.push(
    `<< /Length ${Buffer.byteLength(stream)} >>\nstream\n${stream}\nendstream`,
  );
  objects.push(
    "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>",
  );

  let body = "%PDF-1.4\n";
  const offsets: number[] = [];
  objects.forEach((obj, i) => {
    offsets.push(Buffer.byteLength(body));
    body += `${i + 1} 0 obj\n${obj}\nendobj\n`;
  });
  const xrefPos = Buffer.byteLength(body);
  body += `xref\n0 ${objects.length + 1}\n0000000000 65535 f \n`;
  for (const off of offsets) {
    body += `${off.toString().padStart(10, "0")} 00000 n \n`;
  }
  body +=
    `trailer\n<< /Size ${objects.length + 1} /Root 1 0 R >>\n` +
    `startxref\n${xrefPos}\n%%EOF\n`;
  return Buffer.from(body, "latin1");
}
