/** Scene -> SVG serialization (deterministic, no ids, no dates). */

import { Element, Scene } from "./chart.js";

const FONT = "DejaVu Sans, Helvetica, Arial, sans-serif";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function num(v: number): string {
  return Number(v.toFixed(2)).toString();
}

function dash(on?: boolean): string {
  return on ? ' stroke-dasharray="5,3"' : "";
}

function render(el: Element): string {
  switch (el.kind) {
    case "rect":
      return `<rect x="${num(el.x)}" y="${num(el.y)}" width="${num(el.w)}" height="${num(el.h)}" fill="${el.fill}"/>`;
    case "line":
      return `<line x1="${num(el.x1)}" y1="${num(el.y1)}" x2="${num(el.x2)}" y2="${num(el.y2)}" stroke="${el.color}" stroke-width="${el.width}"${dash(el.dashed)}/>`;
    case "polyline": {
      const pts = el.points.map(([x, y]) => `${num(x)},${num(y)}`).join(" ");
      return `<polyline points="${pts}" fill="none" stroke="${el.color}" stroke-width="${el.width}"${dash(el.dashed)}/>`;
    }
    case "circle": {
      const fill = el.filled ? el.color : "#ffffff";
      return `<circle cx="${num(el.cx)}" cy="${num(el.cy)}" r="${num(el.r)}" fill="${fill}" stroke="${el.color}" stroke-width="1"/>`;
    }
    case "polygon": {
      const pts = el.points.map(([x, y]) => `${num(x)},${num(y)}`).join(" ");
      const fill = el.filled ? el.color : "#ffffff";
      return `<polygon points="${pts}" fill="${fill}" stroke="${el.color}" stroke-width="1"/>`;
    }
    case "text": {
      const rot = el.rotate
        ? ` transform="rotate(-90 ${num(el.x)} ${num(el.y)})"`
        : "";
      return `<text x="${num(el.x)}" y="${num(el.y)}" font-size="${el.size}" font-family="${FONT}" fill="${el.color}" text-anchor="${el.anchor}"${rot}>${esc(el.text)}</text>`;
    }
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.elements.map(render).join("\n  ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" ` +
    `height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n  ` +
    body +
    "\n</svg>\n"
  );
}
