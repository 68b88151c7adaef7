import { ApiError } from './api.js';
import type { AppContext } from './app.js';
import type { ArithmeticTerm, Sign } from './types.js';

const PANEL = `
<h2>anchor arithmetic</h2>
<div id="terms-list"></div>
<div class="row">
  <button id="add-term" type="button">add term</button>
  <button id="compose" type="button">compose</button>
</div>
<p id="arithmetic-hint" class="hint" role="status"></p>
<div id="operand-strip" class="tile-grid"></div>
<div class="row">
  <img id="arithmetic-result" alt="arithmetic result" hidden>
  <code id="result-latent"></code>
</div>
`;

export function initArithmetic(panel: HTMLElement, ctx: AppContext): void {
  panel.innerHTML = PANEL;

  const termsList = panel.querySelector<HTMLElement>('#terms-list')!;
  const hintLine = panel.querySelector<HTMLElement>('#arithmetic-hint')!;
  const operandStrip = panel.querySelector<HTMLElement>('#operand-strip')!;
  const resultImage = panel.querySelector<HTMLImageElement>('#arithmetic-result')!;
  const resultLatent = panel.querySelector<HTMLElement>('#result-latent')!;

  function hint(text: string): void {
    hintLine.textContent = text;
  }

  function populateSetSelect(select: HTMLSelectElement): void {
    const previous = select.value;
    select.replaceChildren();
    for (const set of ctx.anchorSets()) {
      const option = document.createElement('option');
      option.value = set.name;
      option.textContent = set.name;
      select.appendChild(option);
    }
    if ([...select.options].some((o) => o.value === previous)) {
      select.value = previous;
    }
  }

  function addTermRow(sign: Sign = '+'): void {
    const row = document.createElement('div');
    row.className = 'term-row';

    const signSelect = document.createElement('select');
    signSelect.className = 'term-sign';
    for (const s of ['+', '-']) {
      const option = document.createElement('option');
      option.value = s;
      option.textContent = s;
      signSelect.appendChild(option);
    }
    signSelect.value = sign;

    const setSelect = document.createElement('select');
    setSelect.className = 'term-set';
    populateSetSelect(setSelect);

    const remove = document.createElement('button');
    remove.type = 'button';
    remove.className = 'remove-term';
    remove.textContent = 'remove';
    remove.addEventListener('click', () => {
      if (termsList.children.length > 1) row.remove();
    });

    row.append(signSelect, setSelect, remove);
    termsList.appendChild(row);
  }

  function currentTerms(): ArithmeticTerm[] | null {
    const terms: ArithmeticTerm[] = [];
    for (const row of termsList.querySelectorAll('.term-row')) {
      const sign = row.querySelector<HTMLSelectElement>('.term-sign')!.value as Sign;
      const name = row.querySelector<HTMLSelectElement>('.term-set')!.value;
      if (!name) return null;
      terms.push({ sign, anchor_set: name });
    }
    return terms.length > 0 ? terms : null;
  }

  async function compose(): Promise<void> {
    const modelId = ctx.modelId();
    if (!modelId) {
      hint('no model selected');
      return;
    }
    const terms = currentTerms();
    if (!terms) {
      hint('every term needs a saved anchor set');
      return;
    }
    try {
      const res = await ctx.api.arithmetic({ model_id: modelId, terms });
      operandStrip.replaceChildren();
      res.operand_image_urls.forEach((url, i) => {
        const img = document.createElement('img');
        img.src = url;
        img.alt = `operand ${i + 1}`;
        operandStrip.appendChild(img);
      });
      resultImage.src = res.result_image_url;
      resultImage.hidden = false;
      resultLatent.textContent = res.result_latent_id;
      hint('');
    } catch (err) {
      hint(err instanceof ApiError ? err.envelope.message : String(err));
    }
  }

  panel.querySelector<HTMLButtonElement>('#add-term')!.addEventListener('click', () => {
    addTermRow('+');
  });
  panel.querySelector<HTMLButtonElement>('#compose')!.addEventListener('click', () => {
    void ctx.tasks.track(compose());
  });

  ctx.onAnchorsChanged(() => {
    for (const select of panel.querySelectorAll<HTMLSelectElement>('.term-set')) {
      populateSetSelect(select);
    }
  });

  addTermRow('+');
}
