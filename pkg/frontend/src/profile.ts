import type { Catalog, Profile } from "./types.js";

export const SLIDER_MAX = 10;

/**
 * Editable mirror of a requirement profile. Sliders run 0..10 and map to
 * weights 0.0..1.0; context flags are checkboxes; forced in/out are chips.
 * Serializing and re-importing a draft is lossless.
 */
export class ProfileDraft {
  sliders: Map<string, number> = new Map();
  flags: Set<string> = new Set();
  forcedIn: Set<string> = new Set();
  forcedOut: Set<string> = new Set();

  constructor(private readonly catalog: Catalog) {
    for (const attr of catalog.attributes) {
      this.sliders.set(attr.id, 0);
    }
  }

  setSlider(attributeId: string, position: number): void {
    if (!this.sliders.has(attributeId)) {
      throw new Error(`unknown attribute ${attributeId}`);
    }
    const clamped = Math.max(0, Math.min(SLIDER_MAX, Math.round(position)));
    this.sliders.set(attributeId, clamped);
  }

  toggleFlag(key: string, on: boolean): void {
    if (!this.catalog.constraint_keys.includes(key)) {
      throw new Error(`unknown context flag ${key}`);
    }
    if (on) this.flags.add(key);
    else this.flags.delete(key);
  }

  forceIn(patternId: string): void {
    this.forcedOut.delete(patternId);
    this.forcedIn.add(patternId);
  }

  forceOut(patternId: string): void {
    this.forcedIn.delete(patternId);
    this.forcedOut.add(patternId);
  }

  unforce(patternId: string): void {
    this.forcedIn.delete(patternId);
    this.forcedOut.delete(patternId);
  }

  /** The profile the service sees. Zero-weight attributes are omitted. */
  toProfile(): Profile {
    const weights: Record<string, number> = {};
    for (const [attr, pos] of [...this.sliders.entries()].sort()) {
      if (pos > 0) {
        weights[attr] = pos / SLIDER_MAX;
      }
    }
    return {
      weights,
      context_flags: [...this.flags].sort(),
      forced_in: [...this.forcedIn].sort(),
      forced_out: [...this.forcedOut].sort(),
    };
  }

  exportJson(): string {
    return JSON.stringify(this.toProfile());
  }

  importJson(text: string): void {
    const profile = JSON.parse(text) as Profile;
    for (const id of this.sliders.keys()) {
      this.sliders.set(id, 0);
    }
    for (const [attr, weight] of Object.entries(profile.weights ?? {})) {
      this.setSlider(attr, weight * SLIDER_MAX);
    }
    this.flags = new Set(profile.context_flags ?? []);
    this.forcedIn = new Set(profile.forced_in ?? []);
    this.forcedOut = new Set(profile.forced_out ?? []);
  }
}
