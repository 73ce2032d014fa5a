/**
 * Typed client for the botbench HTTP API. All state lives server-side; the
 * UI renders exclusively from these responses.
 */

import type {
    CaseJson,
    ConversationJson,
    DagJson,
    GraphFilter,
    Polarity,
    ReplayMode,
    ReportJson,
    TaskJson,
    TemplateJson,
    TurnJson,
    TurnPairJson,
} from './types.js';

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        detail: string,
    ) {
        super(detail);
    }
}

/** Build a query string from defined, nonempty params (sorted for stability). */
export function buildQuery(params: Record<string, string | undefined>): string {
    const pairs = Object.entries(params)
        .filter((entry): entry is [string, string] => !!entry[1])
        .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
        .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(v)}`);
    return pairs.length ? `?${pairs.join('&')}` : '';
}

async function parseError(response: Response): Promise<ApiError> {
    let code = `HTTP ${response.status}`;
    let detail = response.statusText;
    try {
        const body = await response.json();
        if (body && typeof body === 'object') {
            code = body.error ?? code;
            detail = body.detail ?? JSON.stringify(body);
        }
    } catch {
        // non-JSON error body; keep the status text
    }
    return new ApiError(response.status, code, detail);
}

export class ApiClient {
    constructor(private readonly baseUrl: string = '') {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await fetch(this.baseUrl + path, {
            headers: { 'content-type': 'application/json' },
            ...init,
        });
        if (!response.ok) {
            throw await parseError(response);
        }
        return (await response.json()) as T;
    }

    listTasks(): Promise<TaskJson[]> {
        return this.request('/tasks');
    }

    listTemplates(): Promise<TemplateJson[]> {
        return this.request('/templates');
    }

    saveTemplate(template: TemplateJson): Promise<TemplateJson> {
        return this.request(`/templates/${encodeURIComponent(template.id)}`, {
            method: 'PUT',
            body: JSON.stringify(template),
        });
    }

    listConversations(filter: GraphFilter = {}): Promise<ConversationJson[]> {
        return this.request(
            `/conversations${buildQuery({ tag: filter.tag, source: filter.source || undefined })}`,
        );
    }

    getConversation(id: string): Promise<ConversationJson> {
        return this.request(`/conversations/${encodeURIComponent(id)}`);
    }

    createConversation(taskId: string, templateId: string): Promise<ConversationJson> {
        return this.request('/conversations', {
            method: 'POST',
            body: JSON.stringify({ task_id: taskId, template_id: templateId, source: 'web' }),
        });
    }

    submitTurn(conversationId: string, text: string): Promise<TurnPairJson> {
        return this.request(`/conversations/${encodeURIComponent(conversationId)}/turns`, {
            method: 'POST',
            body: JSON.stringify({ text }),
        });
    }

    forkConversation(conversationId: string, turnIndex: number): Promise<ConversationJson> {
        return this.request(`/conversations/${encodeURIComponent(conversationId)}/fork`, {
            method: 'POST',
            body: JSON.stringify({ turn_index: turnIndex }),
        });
    }

    addTag(
        conversationId: string,
        turnIndex: number,
        name: string,
        polarity: Polarity,
        note?: string,
    ): Promise<TurnJson> {
        return this.request(
            `/conversations/${encodeURIComponent(conversationId)}/turns/${turnIndex}/tags`,
            { method: 'POST', body: JSON.stringify({ name, polarity, note: note ?? null }) },
        );
    }

    removeTag(conversationId: string, turnIndex: number, name: string): Promise<TurnJson> {
        return this.request(
            `/conversations/${encodeURIComponent(conversationId)}/turns/${turnIndex}/tags/${encodeURIComponent(name)}`,
            { method: 'DELETE' },
        );
    }

    graph(filter: GraphFilter = {}): Promise<DagJson> {
        return this.request(
            `/graph${buildQuery({ tag: filter.tag, source: filter.source || undefined, format: 'json' })}`,
        );
    }

    regressionCases(filter: GraphFilter = {}): Promise<CaseJson[]> {
        return this.request(
            `/regression/cases${buildQuery({ tag: filter.tag, source: filter.source || undefined })}`,
        );
    }

    runRegression(
        template: TemplateJson,
        filter: GraphFilter = {},
        mode: ReplayMode = 'individual',
    ): Promise<ReportJson> {
        return this.request('/regression/run', {
            method: 'POST',
            body: JSON.stringify({
                template,
                tag: filter.tag || null,
                source: filter.source || null,
                mode,
            }),
        });
    }
}
