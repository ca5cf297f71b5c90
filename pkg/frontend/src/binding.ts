/**
 * Binding-editor state: click-to-pair interactions and the JSON schema.
 *
 * The editor is a plain immutable value; every interaction returns a new
 * one. Serialization must round-trip losslessly through the service's
 * binding JSON schema, so this module owns the exact field layout.
 */

import type { BindingJson, BindingPairJson, Proposal } from "./types.js";

export interface BindingEditor {
  pairs: BindingPairJson[];
  bindRootVelocity: boolean;
  /** Source joint armed by the last click, waiting for a target click. */
  pendingSource: string | null;
}

export function emptyEditor(): BindingEditor {
  return { pairs: [], bindRootVelocity: true, pendingSource: null };
}

/** Clicking a source joint arms it (clicking it again disarms). */
export function clickSourceJoint(editor: BindingEditor, joint: string): BindingEditor {
  const pendingSource = editor.pendingSource === joint ? null : joint;
  return { ...editor, pendingSource };
}

/**
 * Clicking a target joint completes the armed pair. A target can carry
 * at most one pair, so re-binding an already-bound target replaces its
 * pair. With nothing armed, clicking a bound target removes its pair.
 */
export function clickTargetJoint(editor: BindingEditor, joint: string): BindingEditor {
  if (editor.pendingSource === null) {
    return { ...editor, pairs: editor.pairs.filter((p) => p.target !== joint) };
  }
  const pairs = editor.pairs.filter((p) => p.target !== joint);
  pairs.push({ target: joint, source: editor.pendingSource });
  return { ...editor, pairs, pendingSource: null };
}

export function setBindRootVelocity(editor: BindingEditor, value: boolean): BindingEditor {
  return { ...editor, bindRootVelocity: value };
}

/** Accept ranked proposals wholesale: first proposal wins each target. */
export function acceptProposals(editor: BindingEditor, proposals: Proposal[]): BindingEditor {
  const pairs: BindingPairJson[] = [];
  const taken = new Set<string>();
  for (const proposal of proposals) {
    for (const pair of proposal.pairs) {
      if (!taken.has(pair.target)) {
        taken.add(pair.target);
        pairs.push({ ...pair });
      }
    }
  }
  return { ...editor, pairs, pendingSource: null };
}

/** The exact schema the service exchanges; `alignment` only if present. */
export function toJson(editor: BindingEditor): BindingJson {
  return {
    pairs: editor.pairs.map((p) =>
      p.alignment === undefined
        ? { target: p.target, source: p.source }
        : { target: p.target, source: p.source, alignment: p.alignment },
    ),
    bind_root_velocity: editor.bindRootVelocity,
  };
}

export function fromJson(json: BindingJson): BindingEditor {
  return {
    pairs: json.pairs.map((p) => ({ ...p })),
    bindRootVelocity: json.bind_root_velocity,
    pendingSource: null,
  };
}

/** Percentage of joints covered: 200 * |pairs| / (J_source + J_target). */
export function bindingRate(nPairs: number, nSourceJoints: number, nTargetJoints: number): number {
  return (200.0 * nPairs) / (nSourceJoints + nTargetJoints);
}

/** Per-pair highlight color, stable under reordering. */
export function pairColor(index: number): string {
  return `hsl(${(index * 53) % 360} 75% 55%)`;
}
