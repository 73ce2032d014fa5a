/** App shell: tab bar + the four views, sharing one ApiClient and filters. */

import { AnnotatorView } from './annotator.js';
import { ApiClient } from './api.js';
import type { AppContext, View, ViewName } from './app.js';
import { CollectorView } from './collector.js';
import { TestPanelView } from './testpanel.js';
import { VisualizerView } from './visualizer.js';

const VIEWS: { name: ViewName; label: string }[] = [
    { name: 'collect', label: 'Collect' },
    { name: 'annotate', label: 'Annotate' },
    { name: 'visualize', label: 'Visualize' },
    { name: 'test', label: 'Test' },
];

function boot(): void {
    const tabBar = document.getElementById('tabs')!;
    const container = document.getElementById('view')!;

    const app: AppContext = {
        api: new ApiClient(''),
        filters: { tag: '', source: '' },
        activeConversationId: null,
        switchTo(view: ViewName, conversationId?: string): void {
            if (conversationId !== undefined) {
                app.activeConversationId = conversationId;
            }
            activate(view);
        },
    };

    const roots = new Map<ViewName, HTMLElement>();
    const views = new Map<ViewName, View>();
    for (const { name } of VIEWS) {
        const root = document.createElement('div');
        root.className = 'view-root hidden';
        container.append(root);
        roots.set(name, root);
    }
    views.set('collect', new CollectorView(roots.get('collect')!, app));
    views.set('annotate', new AnnotatorView(roots.get('annotate')!, app));
    views.set('visualize', new VisualizerView(roots.get('visualize')!, app));
    views.set('test', new TestPanelView(roots.get('test')!, app));

    const buttons = new Map<ViewName, HTMLButtonElement>();
    for (const { name, label } of VIEWS) {
        const button = document.createElement('button');
        button.textContent = label;
        button.addEventListener('click', () => activate(name));
        tabBar.append(button);
        buttons.set(name, button);
    }

    function activate(name: ViewName): void {
        for (const [viewName, root] of roots) {
            root.classList.toggle('hidden', viewName !== name);
            buttons.get(viewName)!.classList.toggle('active', viewName === name);
        }
        void views.get(name)!.refresh().catch((error) => {
            console.error(`failed to refresh ${name} view`, error);
        });
    }

    activate('collect');
}

boot();
