// Workbench wiring: fetch state from the engine, render, and route every
// interaction back through the API. The client holds no authoritative data.

import { ApiClient, ApiError } from "./api.js";
import {
  initialViewState,
  visiblePairs,
  withIteration,
  withMode,
  withSelection,
  type HeatmapMode,
  type ViewState,
} from "./state.js";
import { buildAlignmentView } from "./views/alignment.js";
import { buildCanvas, dragBody, targetCosine } from "./views/dragCanvas.js";
import { buildInspectorView, likertBody } from "./views/inspector.js";
import { buildLens, lensQuery, type LensSpan } from "./views/changeLens.js";
import {
  renderAlignment,
  renderCanvas,
  renderInspector,
  toast,
} from "./render.js";
import type { AlignmentSetDto, DiffDto, EditionDto, NeighborsDto } from "./types.js";

const MIN_TARGET_COSINE = -0.95;

const query = new URLSearchParams(window.location.search);
const api = new ApiClient(query.get("api") ?? "http://127.0.0.1:8040");

interface AppData {
  left: EditionDto;
  right: EditionDto;
  set: AlignmentSetDto;
  diff: DiffDto | null;
  neighbors: NeighborsDto | null;
  lens: Map<number, LensSpan[]> | null;
}

let state: ViewState;
let data: AppData;

const $ = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
};

const refreshAlignment = async (): Promise<void> => {
  const history = await api.getHistory();
  const iterations = history.alignments;
  const current = iterations[iterations.length - 1];
  data.set = await api.getAlignment(current);
  const previous = iterations.filter((i) => i < current).pop();
  data.diff =
    previous !== undefined ? await api.getDiff(previous, current) : null;
  state = withIteration(state, data.set);
};

const refreshLens = async (fromIter: number, toIter: number): Promise<void> => {
  if (state.mode === "similarity") {
    data.lens = null;
    return;
  }
  const bounds = lensQuery(fromIter, toIter, state.mode);
  const spans = new Map<number, LensSpan[]>();
  for (const line of data.left.lines) {
    const change = await api.getWordChange(
      [data.left.edition_id, line.index],
      bounds.from,
      bounds.to,
      bounds.mode
    );
    spans.set(line.index, buildLens(change));
  }
  data.lens = spans;
};

const draw = (): void => {
  const filtered = { ...data.set, pairs: visiblePairs(state, data.set) };
  renderAlignment(
    $("alignment"),
    data.left,
    data.right,
    buildAlignmentView(filtered, data.diff, state.selected),
    data.lens,
    {
      onSelect: (ribbon) => {
        state = withSelection(state, data.set, {
          a: ribbon.a,
          b: ribbon.b,
          bin: ribbon.bin,
        });
        void drawInspector();
      },
      onToken: (token) => void openNeighborhood(token),
    }
  );
  $("iteration-label").textContent = `iteration ${state.iteration}`;
  void drawInspector();
  drawCanvas();
};

const drawInspector = async (): Promise<void> => {
  const target = $("inspector");
  if (!state.selected) {
    renderInspector(target, null, api.busy, () => undefined);
    return;
  }
  const heatmap = await api.getHeatmap(state.selected.a, state.selected.b);
  renderInspector(target, buildInspectorView(heatmap), api.busy, (rating) => {
    void submitRating(rating);
  });
};

const drawCanvas = (): void => {
  renderCanvas(
    $("canvas-pane"),
    data.neighbors ? buildCanvas(data.neighbors) : [],
    {
      onDrop: (sourceId, targetId, distance, refDistance) => {
        void submitDrag(sourceId, targetId, distance, refDistance);
      },
    }
  );
};

const submitRating = async (rating: number): Promise<void> => {
  if (!state.selected) return;
  try {
    const body = likertBody(state.selected, rating);
    const before = state.iteration;
    const result = await api.postRating(body.a, body.b, body.rating);
    toast(`rated ${rating}: ${result.changed_tokens.length} words moved`);
    await refreshLens(before, result.iteration);
    draw();
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      toast("another change is in flight; retry in a moment");
    } else {
      toast(String(error));
    }
  }
};

const submitDrag = async (
  sourceId: number,
  targetId: number,
  distance: number,
  refDistance: number
): Promise<void> => {
  if (!data.neighbors) return;
  const neighbor = data.neighbors.neighbors.find((n) => n.id === targetId);
  const body = dragBody(
    targetId,
    sourceId,
    targetCosine(distance, {
      refDistance,
      refCosine: neighbor?.cosine ?? 0,
      minCosine: MIN_TARGET_COSINE,
    })
  );
  if (!body) return; // drop on self
  try {
    const before = state.iteration;
    const result = await api.postDrag(body.i, body.j, body.target);
    toast(`moved: ${result.changed_tokens.join(", ")}`);
    data.neighbors = await api.getNeighbors(data.neighbors.token.token);
    await refreshLens(before, result.iteration);
    state = { ...state, iteration: result.iteration };
    draw();
  } catch (error) {
    toast(String(error));
  }
};

const openNeighborhood = async (token: string): Promise<void> => {
  try {
    data.neighbors = await api.getNeighbors(token);
    drawCanvas();
  } catch (error) {
    toast(String(error));
  }
};

const realign = async (): Promise<void> => {
  try {
    const result = await api.postRealign(state.editionA, state.editionB);
    data.set = result.alignment;
    data.diff = result.diff;
    state = withIteration(state, data.set);
    draw();
  } catch (error) {
    toast(String(error));
  }
};

const boot = async (): Promise<void> => {
  const editions = await api.getEditions();
  if (editions.editions.length < 2) {
    $("alignment").textContent = "The project needs at least two editions.";
    return;
  }
  data = {
    left: editions.editions[0],
    right: editions.editions[1],
    set: undefined as unknown as AlignmentSetDto,
    diff: null,
    neighbors: null,
    lens: null,
  };
  state = initialViewState(
    data.left.edition_id,
    data.right.edition_id,
    0
  );
  await refreshAlignment();

  const modeSelect = $("mode") as HTMLSelectElement;
  modeSelect.addEventListener("change", () => {
    state = withMode(state, modeSelect.value as HeatmapMode);
    void (async () => {
      const history = await api.getHistory();
      const latest = history.iterations[history.iterations.length - 1];
      await refreshLens(0, latest);
      draw();
    })();
  });
  const threshold = $("threshold") as HTMLInputElement;
  threshold.addEventListener("input", () => {
    state = { ...state, minSimilarity: Number(threshold.value) };
    draw();
  });
  $("realign").addEventListener("click", () => void realign());

  draw();
};

void boot().catch((error) => {
  document.body.appendChild(document.createTextNode(String(error)));
});
