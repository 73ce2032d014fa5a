import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { layeredLayout, NODE_HEIGHT, NODE_WIDTH } from '../src/layout.js';
import type { DagJson } from '../src/types.js';

const dag = JSON.parse(
    readFileSync(new URL('./fixtures/dag.json', import.meta.url), 'utf-8'),
) as DagJson;

describe('layeredLayout on the shipped 12-conversation fixture', () => {
    const layout = layeredLayout(dag);

    it('positions every node (all fixture nodes render)', () => {
        expect(dag.nodes.length).toBeGreaterThan(0);
        expect(layout.positions.size).toBe(dag.nodes.length);
        for (const node of dag.nodes) {
            const pos = layout.positions.get(node.id);
            expect(pos).toBeDefined();
            expect(Number.isFinite(pos!.x)).toBe(true);
            expect(Number.isFinite(pos!.y)).toBe(true);
        }
    });

    it('every edge points strictly downward', () => {
        for (const edge of dag.edges) {
            const from = layout.positions.get(edge.from)!;
            const to = layout.positions.get(edge.to)!;
            expect(from.y).toBeLessThan(to.y);
            expect(to.layer).toBeGreaterThan(from.layer);
        }
    });

    it('nodes within a layer never overlap', () => {
        for (const layer of layout.layers) {
            const xs = layer.map((id) => layout.positions.get(id)!.x).sort((a, b) => a - b);
            for (let i = 1; i < xs.length; i++) {
                expect(xs[i]! - xs[i - 1]!).toBeGreaterThanOrEqual(NODE_WIDTH);
            }
        }
    });

    it('fits inside the reported bounds', () => {
        for (const pos of layout.positions.values()) {
            expect(pos.x - NODE_WIDTH / 2).toBeGreaterThanOrEqual(0);
            expect(pos.x + NODE_WIDTH / 2).toBeLessThanOrEqual(layout.width);
            expect(pos.y - NODE_HEIGHT / 2).toBeGreaterThanOrEqual(0);
            expect(pos.y + NODE_HEIGHT / 2).toBeLessThanOrEqual(layout.height);
        }
    });

    it('is deterministic', () => {
        const again = layeredLayout(dag);
        for (const [id, pos] of layout.positions) {
            expect(again.positions.get(id)).toEqual(pos);
        }
    });

    it('handles the empty graph', () => {
        const empty = layeredLayout({ schema_version: 1, nodes: [], edges: [] });
        expect(empty.positions.size).toBe(0);
        expect(empty.layers).toEqual([]);
    });
});
