/** DOM wiring: one canvas, a control strip, and a readout panel.
 *
 * All geometry and state logic lives in coords.ts / state.ts; this layer only
 * forwards events and repaints.
 */

import { ApiError, Client, type Axis } from './api.js';
import { mmToPixel, sliceCount, sliceShape } from './coords.js';
import * as S from './state.js';

export class Viewer {
  private state = S.initialState();
  private client: Client;
  private canvas: HTMLCanvasElement;
  private status: HTMLElement;
  private readout: HTMLElement;
  private slider: HTMLInputElement;
  private runButton: HTMLButtonElement;
  private overlayToggle: HTMLInputElement;

  constructor(root: HTMLElement, client: Client) {
    this.client = client;
    root.innerHTML = `
      <div class="bar">
        <input type="file" id="files" multiple accept=".mhd,.raw,.mha">
        <select id="axis"><option>z</option><option>y</option><option>x</option></select>
        <input type="range" id="slice" min="0" max="0" value="0">
        <label><input type="checkbox" id="overlay" disabled> overlay</label>
        <label>stiffness <input type="number" id="delta_r" value="2" min="0" step="1"></label>
        <button id="run" disabled>segment</button>
      </div>
      <canvas id="view" width="256" height="256"></canvas>
      <div id="status"></div>
      <div id="readout"></div>`;
    this.canvas = root.querySelector('#view') as HTMLCanvasElement;
    this.status = root.querySelector('#status') as HTMLElement;
    this.readout = root.querySelector('#readout') as HTMLElement;
    this.slider = root.querySelector('#slice') as HTMLInputElement;
    this.runButton = root.querySelector('#run') as HTMLButtonElement;
    this.overlayToggle = root.querySelector('#overlay') as HTMLInputElement;

    (root.querySelector('#files') as HTMLInputElement).addEventListener(
      'change', (e) => void this.openFiles((e.target as HTMLInputElement).files));
    (root.querySelector('#axis') as HTMLSelectElement).addEventListener(
      'change', (e) => this.update(S.setAxis(this.state, (e.target as HTMLSelectElement).value as Axis)));
    this.slider.addEventListener('input',
      () => this.update(S.setSlice(this.state, Number(this.slider.value))));
    this.overlayToggle.addEventListener('change',
      () => this.update(S.toggleOverlay(this.state)));
    (root.querySelector('#delta_r') as HTMLInputElement).addEventListener(
      'change', (e) => this.update(S.setParams(this.state,
        { delta_r: Number((e.target as HTMLInputElement).value) })));
    this.canvas.addEventListener('click', (e) => {
      const rect = this.canvas.getBoundingClientRect();
      const scaleX = this.canvas.width / rect.width;
      const scaleY = this.canvas.height / rect.height;
      this.update(S.placeSeed(this.state,
        (e.clientX - rect.left) * scaleX, (e.clientY - rect.top) * scaleY));
    });
    this.runButton.addEventListener('click', () => void this.run());
  }

  private async openFiles(files: FileList | null): Promise<void> {
    if (!files || files.length === 0) return;
    try {
      let meta;
      if (files.length === 1) {
        meta = await this.client.uploadVolumeBundle(files[0]);
      } else {
        const list = Array.from(files);
        const header = list.find((f) => f.name.endsWith('.mhd'));
        const raw = list.find((f) => f.name.endsWith('.raw'));
        if (!header || !raw) throw new Error('select a .mhd header and its .raw file');
        meta = await this.client.uploadVolume(header, raw);
      }
      this.update(S.withVolume(this.state, meta));
      this.status.textContent =
        `volume ${meta.dims.join('x')} at ${meta.spacing.join('/')} mm`;
    } catch (err) {
      this.status.textContent = err instanceof Error ? err.message : String(err);
    }
  }

  private async run(): Promise<void> {
    if (!S.canRun(this.state) || !this.state.volume || !this.state.seedMm) return;
    this.update(S.beginRun(this.state));
    this.status.textContent = 'segmenting...';
    try {
      const summary = await this.client.segment(
        this.state.volume.id, this.state.seedMm, this.state.params);
      this.update(S.applySegmentation(this.state, summary));
      this.status.textContent = '';
    } catch (err) {
      this.update(S.failRun(this.state));
      this.status.textContent = err instanceof ApiError && err.field
        ? `${err.field}: ${err.message}` : String(err);
    }
  }

  private update(next: S.ViewerState): void {
    this.state = next;
    void this.repaint();
  }

  private async repaint(): Promise<void> {
    const state = this.state;
    this.runButton.disabled = !S.canRun(state);
    this.overlayToggle.disabled = !S.canToggleOverlay(state);
    this.overlayToggle.checked = state.overlayVisible;
    if (!state.volume) return;
    const geom = S.geometryOf(state);
    this.slider.max = String(sliceCount(geom, state.axis) - 1);
    this.slider.value = String(state.sliceIndex);

    const { cols, rows } = sliceShape(geom, state.axis);
    this.canvas.width = cols;
    this.canvas.height = rows;
    const useOverlay = state.overlayVisible && state.lastSegmentation;
    const blob = useOverlay && state.lastSegmentation
      ? await this.client.fetchOverlay(state.lastSegmentation.id, state.axis,
                                       state.sliceIndex, state.window, state.level)
      : await this.client.fetchSlice(state.volume.id, state.axis,
                                     state.sliceIndex, state.window, state.level);
    const bitmap = await createImageBitmap(blob);
    const ctx = this.canvas.getContext('2d')!;
    ctx.drawImage(bitmap, 0, 0);

    if (state.seedMm) {
      const pos = mmToPixel(geom, state.axis, state.sliceIndex, state.seedMm);
      if (pos.onSlice) {
        ctx.strokeStyle = '#00e0ff';
        ctx.beginPath();
        ctx.arc(pos.px + 0.5, pos.py + 0.5, 4, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
    this.readout.textContent = state.lastSegmentation
      ? `volume ${state.lastSegmentation.volumeMm3.toFixed(0)} mm3, ` +
        Object.entries(state.lastSegmentation.runtimeMs)
          .map(([k, v]) => `${k} ${v.toFixed(0)}`).join(', ')
      : '';
  }
}
