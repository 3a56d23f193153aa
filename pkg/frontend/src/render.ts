// Thin DOM/SVG layer over the view models. Nothing here recomputes engine
// values; it only places what the models hand over.

import type { AlignmentView, Ribbon } from "./views/alignment.js";
import type { CanvasPoint } from "./views/dragCanvas.js";
import type { InspectorView } from "./views/inspector.js";
import type { LensSpan } from "./views/changeLens.js";
import { lensColor } from "./views/changeLens.js";
import type { EditionDto, LineRef } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const ROW_HEIGHT = 26;

const el = <K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string
): HTMLElementTagNameMap[K] => {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
};

export interface AlignmentHandlers {
  onSelect: (ribbon: Ribbon) => void;
  onToken: (token: string) => void;
}

export const renderAlignment = (
  container: HTMLElement,
  left: EditionDto,
  right: EditionDto,
  view: AlignmentView,
  lens: Map<number, LensSpan[]> | null, // left-edition line index -> spans
  handlers: AlignmentHandlers
): void => {
  container.replaceChildren();
  const height =
    Math.max(left.lines.length, right.lines.length) * ROW_HEIGHT + ROW_HEIGHT;

  const panel = el("div", "align-panel");
  panel.style.height = `${height}px`;

  const columns: Array<[EditionDto, string, boolean]> = [
    [left, "col-left", true],
    [right, "col-right", false],
  ];
  for (const [edition, cls, isLeft] of columns) {
    const column = el("div", `edition-col ${cls}`);
    const title = el("div", "edition-title", edition.title);
    column.appendChild(title);
    for (const line of edition.lines) {
      const row = el("div", "line-row");
      row.dataset.index = String(line.index);
      for (const token of line.tokens) {
        const chip = el("span", "token", token);
        if (isLeft && lens) {
          const spans = lens.get(line.index);
          const hit = spans?.find((s) => s.token === token);
          if (hit) chip.style.backgroundColor = lensColor(hit.intensity);
        }
        chip.addEventListener("click", () => handlers.onToken(token));
        row.appendChild(chip);
      }
      column.appendChild(row);
    }
    panel.appendChild(column);
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "ribbon-layer");
  svg.setAttribute("width", "100%");
  svg.setAttribute("height", String(height));

  const y = (index: number) => ROW_HEIGHT * (index + 1) + ROW_HEIGHT / 2;
  const drawRibbon = (a: LineRef, b: LineRef) => {
    const path = document.createElementNS(SVG_NS, "line");
    path.setAttribute("x1", "0%");
    path.setAttribute("x2", "100%");
    path.setAttribute("y1", String(y(a[1])));
    path.setAttribute("y2", String(y(b[1])));
    return path;
  };

  for (const ghost of view.ghosts) {
    const path = drawRibbon(ghost.a, ghost.b);
    path.setAttribute("class", "ribbon ghost");
    svg.appendChild(path);
  }
  for (const ribbon of view.ribbons) {
    const path = drawRibbon(ribbon.a, ribbon.b);
    path.setAttribute("class", `ribbon ${ribbon.diff}${ribbon.selected ? " selected" : ""}`);
    path.setAttribute("stroke", ribbon.diff === "added" ? "#2c8a43" : ribbon.color);
    path.setAttribute("stroke-opacity", String(ribbon.opacity));
    path.setAttribute("stroke-width", ribbon.selected ? "5" : "3");
    path.addEventListener("click", () => handlers.onSelect(ribbon));
    svg.appendChild(path);
  }

  const wrap = el("div", "align-wrap");
  wrap.style.height = `${height}px`;
  wrap.appendChild(svg);
  wrap.appendChild(panel);
  container.appendChild(wrap);

  if (view.empty) {
    container.appendChild(
      el("div", "empty-state", "No alignments at the current thresholds.")
    );
  }
};

export const renderInspector = (
  container: HTMLElement,
  view: InspectorView | null,
  busy: boolean,
  onRate: (rating: number) => void
): void => {
  container.replaceChildren();
  if (!view) {
    container.appendChild(el("div", "hint", "Select a ribbon to inspect a pair."));
    return;
  }
  const table = el("table", "heatgrid");
  const head = el("tr");
  head.appendChild(el("th"));
  for (const col of view.cols) head.appendChild(el("th", "", col));
  table.appendChild(head);
  view.cells.forEach((rowCells, r) => {
    const row = el("tr");
    row.appendChild(el("th", "", view.rows[r]));
    for (const cell of rowCells) {
      const td = el("td", "cell", cell.cosine.toFixed(2));
      const warm = Math.max(0, cell.cosine);
      td.style.backgroundColor = `rgba(51, 101, 138, ${warm.toFixed(3)})`;
      if (cell.nearest) td.classList.add("nearest");
      if (cell.flowMass !== null) {
        td.classList.add("flow");
        td.title = `transport mass ${cell.flowMass.toFixed(3)}`;
      }
      row.appendChild(td);
    }
    table.appendChild(row);
  });
  container.appendChild(table);

  const likert = el("div", "likert");
  for (let rating = 1; rating <= 5; rating++) {
    const button = el("button", "likert-btn", String(rating));
    button.disabled = busy; // single in-flight mutation
    button.addEventListener("click", () => onRate(rating));
    likert.appendChild(button);
  }
  container.appendChild(likert);
};

export interface CanvasHandlers {
  onDrop: (sourceId: number, targetId: number, distance: number, refDistance: number) => void;
}

export const renderCanvas = (
  container: HTMLElement,
  points: CanvasPoint[],
  handlers: CanvasHandlers
): void => {
  container.replaceChildren();
  if (points.length === 0) {
    container.appendChild(el("div", "hint", "Click a token to open its neighborhood."));
    return;
  }
  const size = 340;
  const pad = 30;
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const span = Math.max(
    Math.max(...xs) - Math.min(...xs),
    Math.max(...ys) - Math.min(...ys),
    1e-6
  );
  const scale = (size - 2 * pad) / span;
  const ox = Math.min(...xs);
  const oy = Math.min(...ys);
  const place = (p: CanvasPoint): [number, number] => [
    pad + (p.x - ox) * scale,
    pad + (p.y - oy) * scale,
  ];

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(size));
  svg.setAttribute("height", String(size));
  svg.setAttribute("class", "drag-canvas");

  const center = points[0];
  const [cx, cy] = place(center);
  let dragging: { point: CanvasPoint; node: SVGGElement } | null = null;

  for (const point of points) {
    const [x, y] = place(point);
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("transform", `translate(${x},${y})`);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("r", point.center ? "8" : "6");
    dot.setAttribute("class", point.center ? "pt center" : "pt");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("y", "-10");
    label.textContent = point.token;
    group.appendChild(dot);
    group.appendChild(label);
    if (!point.center) {
      group.addEventListener("pointerdown", (event) => {
        dragging = { point, node: group };
        (event.target as Element).setPointerCapture(event.pointerId);
      });
    }
    svg.appendChild(group);
  }

  svg.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const rect = svg.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    dragging.node.setAttribute("transform", `translate(${x},${y})`);
  });
  svg.addEventListener("pointerup", (event) => {
    if (!dragging) return;
    const rect = svg.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const distance = Math.hypot(x - cx, y - cy);
    const [startX, startY] = place(dragging.point);
    const refDistance = Math.hypot(startX - cx, startY - cy);
    handlers.onDrop(center.id, dragging.point.id, distance, refDistance);
    dragging = null;
  });

  container.appendChild(svg);
};

export const toast = (message: string): void => {
  const note = el("div", "toast", message);
  document.body.appendChild(note);
  setTimeout(() => note.remove(), 4000);
};
