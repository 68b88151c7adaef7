import type { ApiClient, TaskTracker } from './api.js';
import { createTasks } from './api.js';
import type { AnchorSummary, ModelSummary } from './types.js';
import { initArithmetic } from './arithmetic.js';
import { initGallery } from './gallery.js';
import { initTraversal } from './traversal.js';

/** Shared wiring handed to every panel. */
export interface AppContext {
  api: ApiClient;
  tasks: TaskTracker;
  modelId(): string | null;
  anchorSets(): AnchorSummary[];
  refreshAnchors(): Promise<void>;
  onAnchorsChanged(listener: () => void): void;
}

const SHELL = `
<header class="topbar">
  <h1>latentscope explorer</h1>
  <label>model <select id="model-select"></select></label>
  <span id="model-info"></span>
</header>
<main>
  <section class="panel" id="gallery-panel"></section>
  <section class="panel" id="traversal-panel"></section>
  <section class="panel" id="arithmetic-panel"></section>
</main>
`;

function describeModel(m: ModelSummary): string {
  return `${m.input_dim}d → ${m.output_shape.join('×')}`;
}

export async function createApp(root: HTMLElement, api: ApiClient) {
  root.innerHTML = SHELL;
  const tasks = createTasks();

  let models: ModelSummary[] = [];
  let currentModel: string | null = null;
  let sets: AnchorSummary[] = [];
  const anchorListeners: Array<() => void> = [];

  const ctx: AppContext = {
    api,
    tasks,
    modelId: () => currentModel,
    anchorSets: () => sets,
    refreshAnchors: async () => {
      sets = (await api.listAnchors()).anchor_sets;
      for (const listener of anchorListeners) listener();
    },
    onAnchorsChanged: (listener) => anchorListeners.push(listener),
  };

  const traversal = initTraversal(root.querySelector<HTMLElement>('#traversal-panel')!, ctx);
  initArithmetic(root.querySelector<HTMLElement>('#arithmetic-panel')!, ctx);
  initGallery(root.querySelector<HTMLElement>('#gallery-panel')!, ctx, traversal.setEndpoint);

  const select = root.querySelector<HTMLSelectElement>('#model-select')!;
  const info = root.querySelector<HTMLElement>('#model-info')!;

  models = (await api.listModels()).models;
  if (models.length === 0) {
    info.textContent = 'no models uploaded yet; add one with the CLI or POST /api/models';
  } else {
    for (const m of models) {
      const option = document.createElement('option');
      option.value = m.model_id;
      option.textContent = `${m.filename ?? m.model_id.slice(0, 12)} (${describeModel(m)})`;
      select.appendChild(option);
    }
    currentModel = models[0]!.model_id;
    select.value = currentModel;
    info.textContent = describeModel(models[0]!);
  }
  select.addEventListener('change', () => {
    currentModel = select.value || null;
    const m = models.find((entry) => entry.model_id === currentModel);
    info.textContent = m ? describeModel(m) : '';
  });

  await ctx.refreshAnchors();

  return {
    /** Resolves once every tracked request has settled; tests key off this. */
    idle: () => tasks.idle(),
  };
}

export type App = Awaited<ReturnType<typeof createApp>>;
