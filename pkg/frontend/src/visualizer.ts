/**
 * Visualizer: renders the merged conversation graph as layered SVG. The
 * topology comes straight from GET /graph; the client only computes
 * coordinates. Clicking a node lists its member conversations; selecting one
 * highlights that conversation's full path (red-bordered nodes, colored
 * edges). Tagged nodes are filled orange.
 */

import type { AppContext, View } from './app.js';
import { describe } from './collector.js';
import { clear, el, svgEl } from './dom.js';
import {
    conversationPath,
    edgeKey,
    memberBadge,
    nodeClasses,
    nodeConversations,
    type PathSelection,
} from './highlight.js';
import { NODE_HEIGHT, NODE_WIDTH, layeredLayout } from './layout.js';
import type { DagJson, DagNodeJson } from './types.js';

const LABEL_LIMIT = 42;

export class VisualizerView implements View {
    private dag: DagJson | null = null;
    private selection: PathSelection | null = null;
    private canvas = el('div', { class: 'graph-canvas' });
    private sidebar = el('div', { class: 'graph-sidebar' });
    private banner = el('div', { class: 'banner hidden' });
    private tagInput = el('input', { type: 'text', placeholder: 'tag filter' });
    private sourceSelect = el('select');

    constructor(
        private root: HTMLElement,
        private app: AppContext,
    ) {
        for (const source of ['', 'web', 'cli', 'import']) {
            this.sourceSelect.append(el('option', { value: source }, [source || 'any source']));
        }
        const apply = el('button', {}, ['Apply filters']);
        apply.addEventListener('click', () => {
            this.app.filters.tag = this.tagInput.value.trim();
            this.app.filters.source = this.sourceSelect.value as typeof this.app.filters.source;
            void this.refresh();
        });
        this.root.append(
            el('div', { class: 'toolbar' }, [
                el('label', {}, ['Tag: ', this.tagInput]),
                el('label', {}, ['Source: ', this.sourceSelect]),
                apply,
            ]),
            this.banner,
            el('div', { class: 'split' }, [this.canvas, this.sidebar]),
        );
    }

    async refresh(): Promise<void> {
        this.tagInput.value = this.app.filters.tag;
        this.sourceSelect.value = this.app.filters.source;
        try {
            this.dag = await this.app.api.graph({
                tag: this.app.filters.tag || undefined,
                source: this.app.filters.source,
            });
            this.banner.classList.add('hidden');
        } catch (error) {
            this.banner.textContent = describe(error);
            this.banner.classList.remove('hidden');
            return;
        }
        this.selection = null;
        this.render();
        this.renderSidebar(null);
    }

    private selectConversation(conversationId: string): void {
        if (!this.dag) {
            return;
        }
        this.selection = conversationPath(this.dag, conversationId);
        this.render();
    }

    private render(): void {
        clear(this.canvas);
        if (!this.dag || this.dag.nodes.length === 0) {
            this.canvas.append(
                el('p', { class: 'placeholder' }, ['No conversations to draw yet.']),
            );
            return;
        }
        const layout = layeredLayout(this.dag);
        const svg = svgEl('svg', {
            viewBox: `0 0 ${layout.width} ${layout.height}`,
            width: String(layout.width),
            height: String(layout.height),
        });

        for (const edge of this.dag.edges) {
            const from = layout.positions.get(edge.from)!;
            const to = layout.positions.get(edge.to)!;
            const onPath = this.selection?.edgeKeys.has(edgeKey(edge.from, edge.to)) ?? false;
            const line = svgEl('line', {
                x1: String(from.x),
                y1: String(from.y + NODE_HEIGHT / 2),
                x2: String(to.x),
                y2: String(to.y - NODE_HEIGHT / 2),
                class: onPath ? 'edge on-path' : 'edge',
            });
            svg.append(line);
        }

        for (const node of this.dag.nodes) {
            svg.append(this.renderNode(node, layout.positions.get(node.id)!));
        }
        this.canvas.append(svg);
    }

    private renderNode(
        node: DagNodeJson,
        position: { x: number; y: number },
    ): SVGGElement {
        const group = svgEl('g', {
            class: nodeClasses(node, this.selection).join(' '),
            transform: `translate(${position.x - NODE_WIDTH / 2}, ${position.y - NODE_HEIGHT / 2})`,
        });
        group.append(
            svgEl('rect', {
                width: String(NODE_WIDTH),
                height: String(NODE_HEIGHT),
                rx: '6',
            }),
        );
        const label = svgEl('text', { x: '8', y: '22', class: 'label' });
        label.textContent =
            node.text.length > LABEL_LIMIT ? `${node.text.slice(0, LABEL_LIMIT)}…` : node.text;
        const meta = svgEl('text', { x: '8', y: '42', class: 'meta' });
        meta.textContent = node.role + (node.tags.length ? ` · ${node.tags.map((t) => t.name).join(', ')}` : '');
        group.append(label, meta);

        const badge = memberBadge(node);
        if (badge !== null) {
            const circle = svgEl('circle', {
                cx: String(NODE_WIDTH - 2),
                cy: '2',
                r: '11',
                class: 'badge',
            });
            const count = svgEl('text', {
                x: String(NODE_WIDTH - 2),
                y: '6',
                class: 'badge-text',
                'text-anchor': 'middle',
            });
            count.textContent = badge;
            group.append(circle, count);
        }
        group.addEventListener('click', () => this.renderSidebar(node));
        return group;
    }

    private renderSidebar(node: DagNodeJson | null): void {
        clear(this.sidebar);
        if (!node) {
            this.sidebar.append(
                el('p', { class: 'placeholder' }, [
                    'Click a node to list its conversations; pick one to trace its path.',
                ]),
            );
            return;
        }
        this.sidebar.append(
            el('h3', {}, [`${node.role} utterance`]),
            el('p', { class: 'utterance' }, [node.text]),
        );
        if (node.tags.length) {
            const chips = el('p', { class: 'chips' });
            for (const tag of node.tags) {
                chips.append(el('span', { class: `chip ${tag.polarity}` }, [tag.name]));
            }
            this.sidebar.append(chips);
        }
        this.sidebar.append(el('h4', {}, [`${node.members.length} member turn(s)`]));
        for (const conversationId of nodeConversations(node)) {
            const button = el('button', { class: 'small' }, [conversationId]);
            button.addEventListener('click', () => this.selectConversation(conversationId));
            this.sidebar.append(el('div', {}, [button]));
        }
    }
}
