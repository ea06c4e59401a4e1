import { describe, expect, it } from 'vitest';

import { Presumption, ProofNode } from '../src/api.js';
import { countNodes, flattenProof, visibleRows } from '../src/tree.js';

// the commute scenario's shape: chain with two highlighted nodes
const proof: ProofNode = {
  t: 0, goal: 'get(i, work, on_time)', clause_id: 0, children: [
    {
      t: 1, goal: 'arrive(...)', clause_id: 1, children: [
        { t: 2, goal: 'snow(3)', clause_id: 8, children: [] },
        { t: 3, goal: 'Precipitation >= 2', clause_id: null, children: [] },
      ],
    },
    { t: 4, goal: 'calendarEntry(i, work, 9)', clause_id: 10, children: [] },
  ],
};

const presumptions: Presumption[] = [
  { node_t: 3, form: 'Precipitation >= 2', kind: 'state_constraint', rendered: 'Precipitation >= 2' },
  { node_t: 4, form: 'calendarEntry(i, work, 9)', kind: 'user_fact', rendered: 'calendarEntry(i, work, 9)' },
];

describe('proof tree rendering', () => {
  it('flattens in t order with depths', () => {
    const rows = flattenProof(proof, presumptions);
    expect(rows.map((r) => r.t)).toEqual([0, 1, 2, 3, 4]);
    expect(rows.map((r) => r.depth)).toEqual([0, 1, 2, 2, 1]);
  });

  it('row count equals the wire node count', () => {
    expect(flattenProof(proof, presumptions).length).toBe(countNodes(proof));
  });

  it('highlights exactly the presumption nodes', () => {
    const rows = flattenProof(proof, presumptions);
    const marked = rows.filter((r) => r.highlighted);
    expect(marked.map((r) => r.t)).toEqual([3, 4]);
    expect(marked.map((r) => r.kind)).toEqual(['state_constraint', 'user_fact']);
  });

  it('single leaf proof renders one row, no highlights', () => {
    const leaf: ProofNode = { t: 0, goal: 'building(home)', clause_id: 7, children: [] };
    const rows = flattenProof(leaf, []);
    expect(rows).toHaveLength(1);
    expect(rows[0].highlighted).toBe(false);
  });

  it('deep chains indent one level per depth', () => {
    let node: ProofNode = { t: 4, goal: 'leaf', clause_id: 1, children: [] };
    for (let t = 3; t >= 0; t--) {
      node = { t, goal: `level${t}`, clause_id: 1, children: [node] };
    }
    const rows = flattenProof(node, []);
    expect(rows.map((r) => r.depth)).toEqual([0, 1, 2, 3, 4]);
  });

  it('collapsing a node hides its subtree only', () => {
    const rows = flattenProof(proof, presumptions);
    const shown = visibleRows(rows, new Set([1]));
    expect(shown.map((r) => r.t)).toEqual([0, 1, 4]);
  });
});
