/**
 * Selection logic for the visualizer: which nodes and edges light up when a
 * conversation is picked, and how nodes are classed for styling. Pure
 * functions over the DAG payload — topology is never re-derived client-side.
 */

import type { DagJson, DagNodeJson } from './types.js';

export interface PathSelection {
    conversationId: string;
    nodeIds: Set<string>;
    edgeKeys: Set<string>;
}

export function edgeKey(from: string, to: string): string {
    return `${from}->${to}`;
}

/** Nodes and edges carrying the conversation, straight from the graph labels. */
export function conversationPath(dag: DagJson, conversationId: string): PathSelection {
    const nodeIds = new Set<string>();
    for (const node of dag.nodes) {
        if (node.members.some((m) => m.conversation_id === conversationId)) {
            nodeIds.add(node.id);
        }
    }
    const edgeKeys = new Set<string>();
    for (const edge of dag.edges) {
        if (edge.conversations.includes(conversationId)) {
            edgeKeys.add(edgeKey(edge.from, edge.to));
        }
    }
    return { conversationId, nodeIds, edgeKeys };
}

/** CSS classes for one node given the active selection (if any). */
export function nodeClasses(node: DagNodeJson, selection: PathSelection | null): string[] {
    const classes = ['node', `role-${node.role}`];
    if (node.tags.length > 0) {
        classes.push('tagged'); // orange treatment
    }
    if (selection?.nodeIds.has(node.id)) {
        classes.push('on-path'); // red border
    }
    return classes;
}

/** Member-count badge text; only multi-member (merged) nodes get one. */
export function memberBadge(node: DagNodeJson): string | null {
    return node.members.length > 1 ? String(node.members.length) : null;
}

/** Conversation ids traversing a node, for the member side panel. */
export function nodeConversations(node: DagNodeJson): string[] {
    return [...new Set(node.members.map((m) => m.conversation_id))].sort();
}
