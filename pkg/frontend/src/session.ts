// Review session state: image selection, fetched extraction, per-field edit
// buffers with dirty tracking. Pure data + transitions, no DOM, so the
// workflow is unit-testable.

import {
  ApiClient,
  ExtractResponse,
  FieldValue,
  SideResult,
} from "./api.js";

export interface FieldRow {
  name: string;
  side: "front" | "back";
  extracted: FieldValue;
  /** Current edit buffer; starts as the corrected text. */
  buffer: string;
}

export class ReviewSession {
  frontBase64: string | null = null;
  backBase64: string | null = null;
  response: ExtractResponse | null = null;
  private rows: FieldRow[] = [];
  pending = false;

  constructor(private readonly api: ApiClient) {}

  get canFetch(): boolean {
    return this.frontBase64 !== null && this.backBase64 !== null && !this.pending;
  }

  get canSave(): boolean {
    return this.response !== null && !this.pending;
  }

  selectFront(base64: string): void {
    this.frontBase64 = base64;
  }

  selectBack(base64: string): void {
    this.backBase64 = base64;
  }

  async fetchExtraction(): Promise<ExtractResponse> {
    if (!this.frontBase64 || !this.backBase64) {
      throw new Error("both images must be selected before fetching");
    }
    if (this.pending) {
      throw new Error("a fetch is already in flight");
    }
    this.pending = true;
    try {
      this.response = await this.api.extract(this.frontBase64, this.backBase64);
      this.rows = [
        ...sideRows(this.response.front, "front"),
        ...sideRows(this.response.back, "back"),
      ];
      return this.response;
    } finally {
      this.pending = false;
    }
  }

  fields(): readonly FieldRow[] {
    return this.rows;
  }

  edit(name: string, value: string): void {
    const row = this.rows.find((r) => r.name === name);
    if (!row) {
      throw new Error(`unknown field ${name}`);
    }
    row.buffer = value;
  }

  isDirty(name: string): boolean {
    const row = this.rows.find((r) => r.name === name);
    return row !== undefined && row.buffer !== row.extracted.corrected_text;
  }

  dirtyFields(): Record<string, string> {
    const out: Record<string, string> = {};
    for (const row of this.rows) {
      if (row.buffer !== row.extracted.corrected_text) {
        out[row.name] = row.buffer;
      }
    }
    return out;
  }

  /** PATCHes pending edits (if any), then saves and returns the text record. */
  async save(): Promise<string> {
    if (!this.response) {
      throw new Error("nothing to save: fetch an extraction first");
    }
    this.pending = true;
    try {
      const edits = this.dirtyFields();
      if (Object.keys(edits).length > 0) {
        await this.api.editEntry(this.response.id, edits);
      }
      return await this.api.saveEntry(this.response.id);
    } finally {
      this.pending = false;
    }
  }
}

function sideRows(side: SideResult, which: "front" | "back"): FieldRow[] {
  return Object.entries(side.fields).map(([name, extracted]) => ({
    name,
    side: which,
    extracted,
    buffer: extracted.corrected_text,
  }));
}
