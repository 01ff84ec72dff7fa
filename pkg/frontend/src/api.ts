/** Typed client for the segmentation service (/api/v1). */

export interface VolumeMeta {
  id: string;
  dims: [number, number, number];
  spacing: [number, number, number];
  origin: [number, number, number];
  gray_min: number;
  gray_max: number;
}

export interface SegmentationParams {
  delta_r: number;
  subdivisions: number;
  samples_per_ray: number;
  max_radius_mm: number;
  mean_region_d: number;
}

export const DEFAULT_PARAMS: SegmentationParams = {
  delta_r: 2,
  subdivisions: 3,
  samples_per_ray: 60,
  max_radius_mm: 50,
  mean_region_d: 5,
};

export interface SegmentationSummary {
  id: string;
  volume_mm3: number;
  mean_gray: number;
  runtime_ms: Record<string, number>;
  degenerate: boolean;
  cut_index_histogram: number[];
}

export type Axis = 'x' | 'y' | 'z';

export class ApiError extends Error {
  status: number;
  field?: string;

  constructor(status: number, message: string, field?: string) {
    super(message);
    this.status = status;
    this.field = field;
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let message = `HTTP ${resp.status}`;
  let field: string | undefined;
  try {
    const body = await resp.json();
    if (typeof body.error === 'string') message = body.error;
    if (typeof body.field === 'string') field = body.field;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(resp.status, message, field);
}

export class Client {
  constructor(private base: string = '') {}

  /** Upload a detached header + raw payload pair. */
  async uploadVolume(header: Blob, raw: Blob): Promise<VolumeMeta> {
    const form = new FormData();
    form.append('header', header, 'volume.mhd');
    form.append('raw', raw, 'volume.raw');
    const resp = await fetch(`${this.base}/api/v1/volumes`, { method: 'POST', body: form });
    await raiseForStatus(resp);
    return (await resp.json()) as VolumeMeta;
  }

  /** Upload a single-file image with the payload after the header. */
  async uploadVolumeBundle(file: Blob): Promise<VolumeMeta> {
    const form = new FormData();
    form.append('file', file, 'volume.mha');
    const resp = await fetch(`${this.base}/api/v1/volumes`, { method: 'POST', body: form });
    await raiseForStatus(resp);
    return (await resp.json()) as VolumeMeta;
  }

  sliceUrl(volumeId: string, axis: Axis, index: number, window?: number, level?: number): string {
    const query = windowLevelQuery(window, level);
    return `${this.base}/api/v1/volumes/${volumeId}/slices/${axis}/${index}${query}`;
  }

  overlayUrl(segmentationId: string, axis: Axis, index: number,
             window?: number, level?: number): string {
    const query = windowLevelQuery(window, level);
    return `${this.base}/api/v1/segmentations/${segmentationId}/overlays/${axis}/${index}${query}`;
  }

  async fetchSlice(volumeId: string, axis: Axis, index: number,
                   window?: number, level?: number): Promise<Blob> {
    const resp = await fetch(this.sliceUrl(volumeId, axis, index, window, level));
    await raiseForStatus(resp);
    return resp.blob();
  }

  async fetchOverlay(segmentationId: string, axis: Axis, index: number,
                     window?: number, level?: number): Promise<Blob> {
    const resp = await fetch(this.overlayUrl(segmentationId, axis, index, window, level));
    await raiseForStatus(resp);
    return resp.blob();
  }

  async segment(volumeId: string, seedMm: [number, number, number],
                params: SegmentationParams = DEFAULT_PARAMS): Promise<SegmentationSummary> {
    const resp = await fetch(`${this.base}/api/v1/volumes/${volumeId}/segmentations`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ seed_mm: seedMm, ...params }),
    });
    await raiseForStatus(resp);
    return (await resp.json()) as SegmentationSummary;
  }

  async fetchMask(segmentationId: string): Promise<ArrayBuffer> {
    const resp = await fetch(`${this.base}/api/v1/segmentations/${segmentationId}/mask`);
    await raiseForStatus(resp);
    return resp.arrayBuffer();
  }
}

function windowLevelQuery(window?: number, level?: number): string {
  const parts: string[] = [];
  if (window !== undefined) parts.push(`window=${window}`);
  if (level !== undefined) parts.push(`level=${level}`);
  return parts.length ? `?${parts.join('&')}` : '';
}

/** Split a single-file MetaImage into header text and payload bytes. */
export function splitLocalMetaImage(buffer: ArrayBuffer): { header: string; payload: Uint8Array } {
  const bytes = new Uint8Array(buffer);
  const marker = new TextEncoder().encode('ElementDataFile = LOCAL\n');
  outer: for (let i = 0; i + marker.length <= bytes.length; i++) {
    for (let j = 0; j < marker.length; j++) {
      if (bytes[i + j] !== marker[j]) continue outer;
    }
    const end = i + marker.length;
    return {
      header: new TextDecoder().decode(bytes.subarray(0, end)),
      payload: bytes.subarray(end),
    };
  }
  throw new Error('not a single-file MetaImage (no local payload marker)');
}
