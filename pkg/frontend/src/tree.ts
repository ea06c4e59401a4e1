// Proof-record rendering helpers: flatten the wire tree into rows ordered
// by visit index t, marking presumption nodes for highlighting.

import { Presumption, ProofNode } from './api.js';

export interface TreeRow {
  t: number;
  goal: string;
  depth: number;
  highlighted: boolean;
  kind: Presumption['kind'] | null;
  hasChildren: boolean;
}

export function flattenProof(proof: ProofNode, presumptions: Presumption[]): TreeRow[] {
  const byNode = new Map<number, Presumption>();
  for (const p of presumptions) {
    byNode.set(p.node_t, p);
  }
  const rows: TreeRow[] = [];
  const walk = (node: ProofNode, depth: number) => {
    const mark = byNode.get(node.t);
    rows.push({
      t: node.t,
      goal: node.goal,
      depth,
      highlighted: mark !== undefined,
      kind: mark ? mark.kind : null,
      hasChildren: node.children.length > 0,
    });
    for (const child of node.children) {
      walk(child, depth + 1);
    }
  };
  walk(proof, 0);
  return rows;
}

export function countNodes(proof: ProofNode): number {
  let n = 1;
  for (const child of proof.children) {
    n += countNodes(child);
  }
  return n;
}

// rows hidden when an ancestor at `collapsedTs` is collapsed
export function visibleRows(rows: TreeRow[], collapsedTs: Set<number>): TreeRow[] {
  const out: TreeRow[] = [];
  let hideDeeperThan: number | null = null;
  for (const row of rows) {
    if (hideDeeperThan !== null && row.depth > hideDeeperThan) {
      continue;
    }
    hideDeeperThan = null;
    out.push(row);
    if (collapsedTs.has(row.t)) {
      hideDeeperThan = row.depth;
    }
  }
  return out;
}
