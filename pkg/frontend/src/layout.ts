/**
 * Layered top-to-bottom layout for the conversation graph.
 *
 * Layer = longest-path depth from the roots, so every edge points strictly
 * downward. Within a layer, nodes order by the mean x of their predecessors
 * (barycenter) with id as the tie-break, which keeps conversation threads
 * roughly vertical. Pure function: same graph in, same coordinates out.
 */

import type { DagJson } from './types.js';

export const NODE_WIDTH = 180;
export const NODE_HEIGHT = 56;
export const H_GAP = 36;
export const V_GAP = 64;
export const MARGIN = 24;

export interface NodePosition {
    x: number; // center
    y: number; // center
    layer: number;
}

export interface LayoutResult {
    positions: Map<string, NodePosition>;
    layers: string[][];
    width: number;
    height: number;
}

function longestPathLayers(dag: DagJson): Map<string, number> {
    const depth = new Map<string, number>();
    const indegree = new Map<string, number>();
    const outgoing = new Map<string, string[]>();
    for (const node of dag.nodes) {
        depth.set(node.id, 0);
        indegree.set(node.id, 0);
        outgoing.set(node.id, []);
    }
    for (const edge of dag.edges) {
        outgoing.get(edge.from)?.push(edge.to);
        indegree.set(edge.to, (indegree.get(edge.to) ?? 0) + 1);
    }
    const queue = dag.nodes.map((n) => n.id).filter((id) => indegree.get(id) === 0);
    while (queue.length) {
        const id = queue.shift()!;
        const base = depth.get(id) ?? 0;
        for (const next of outgoing.get(id) ?? []) {
            depth.set(next, Math.max(depth.get(next) ?? 0, base + 1));
            const remaining = (indegree.get(next) ?? 1) - 1;
            indegree.set(next, remaining);
            if (remaining === 0) {
                queue.push(next);
            }
        }
    }
    return depth;
}

export function layeredLayout(dag: DagJson): LayoutResult {
    const depth = longestPathLayers(dag);
    const layerCount = dag.nodes.length ? Math.max(...depth.values()) + 1 : 0;
    const layers: string[][] = Array.from({ length: layerCount }, () => []);
    for (const node of dag.nodes) {
        layers[depth.get(node.id) ?? 0]!.push(node.id);
    }

    const predecessors = new Map<string, string[]>();
    for (const edge of dag.edges) {
        if (!predecessors.has(edge.to)) {
            predecessors.set(edge.to, []);
        }
        predecessors.get(edge.to)!.push(edge.from);
    }

    const positions = new Map<string, NodePosition>();
    let maxWidth = 0;
    layers.forEach((layer, layerIndex) => {
        const barycenter = (id: string): number => {
            const preds = (predecessors.get(id) ?? [])
                .map((p) => positions.get(p)?.x)
                .filter((x): x is number => x !== undefined);
            if (!preds.length) {
                return Number.POSITIVE_INFINITY; // roots keep id order at the end
            }
            return preds.reduce((a, b) => a + b, 0) / preds.length;
        };
        layer.sort((a, b) => {
            const ba = barycenter(a);
            const bb = barycenter(b);
            if (ba !== bb) {
                return ba - bb;
            }
            return a < b ? -1 : a > b ? 1 : 0;
        });
        const rowWidth = layer.length * NODE_WIDTH + (layer.length - 1) * H_GAP;
        maxWidth = Math.max(maxWidth, rowWidth);
        layer.forEach((id, i) => {
            positions.set(id, {
                x: MARGIN + i * (NODE_WIDTH + H_GAP) + NODE_WIDTH / 2 - rowWidth / 2,
                y: MARGIN + layerIndex * (NODE_HEIGHT + V_GAP) + NODE_HEIGHT / 2,
                layer: layerIndex,
            });
        });
    });

    // shift every row so the widest row starts at the left margin
    const shift = maxWidth / 2;
    for (const pos of positions.values()) {
        pos.x += shift;
    }

    return {
        positions,
        layers,
        width: maxWidth + 2 * MARGIN,
        height: layerCount * (NODE_HEIGHT + V_GAP) - (layerCount ? V_GAP : 0) + 2 * MARGIN,
    };
}
