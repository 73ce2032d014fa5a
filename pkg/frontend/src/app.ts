/** Shared view state: active view, filters, and the selected conversation. */

import type { ApiClient } from './api.js';
import type { Source } from './types.js';

export type ViewName = 'collect' | 'annotate' | 'visualize' | 'test';

export interface AppContext {
    api: ApiClient;
    filters: { tag: string; source: Source | '' };
    activeConversationId: string | null;
    /** Switch views; optionally focusing a conversation (e.g. after a fork). */
    switchTo(view: ViewName, conversationId?: string): void;
}

export interface View {
    /** (Re)render into the view's root; called on every activation. */
    refresh(): Promise<void>;
}
