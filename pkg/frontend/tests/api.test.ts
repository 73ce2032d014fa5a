import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError, buildQuery } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
    });
}

function stubFetch(response: Response) {
    const calls: { url: string; init?: RequestInit }[] = [];
    vi.stubGlobal(
        'fetch',
        vi.fn(async (url: string, init?: RequestInit) => {
            calls.push({ url, init });
            return response.clone();
        }),
    );
    return calls;
}

afterEach(() => {
    vi.unstubAllGlobals();
});

describe('buildQuery', () => {
    it('drops empty params and sorts keys', () => {
        expect(buildQuery({ tag: 'skip', source: undefined, format: 'json' })).toBe(
            '?format=json&tag=skip',
        );
        expect(buildQuery({})).toBe('');
        expect(buildQuery({ tag: '' })).toBe('');
    });

    it('encodes values', () => {
        expect(buildQuery({ tag: 'a b' })).toBe('?tag=a%20b');
    });
});

describe('ApiClient', () => {
    it('builds graph URLs from filters', async () => {
        const calls = stubFetch(jsonResponse({ schema_version: 1, nodes: [], edges: [] }));
        await new ApiClient('').graph({ tag: 'skip', source: 'web' });
        expect(calls[0]!.url).toBe('/graph?format=json&source=web&tag=skip');
    });

    it('posts turn submissions to the conversation', async () => {
        const calls = stubFetch(
            jsonResponse({
                user_turn: { index: 0, role: 'user', text: 'hi', tags: [] },
                bot_turn: { index: 1, role: 'bot', text: 'hello', tags: [] },
            }),
        );
        const pair = await new ApiClient('').submitTurn('conv-01', 'hi');
        expect(calls[0]!.url).toBe('/conversations/conv-01/turns');
        expect(calls[0]!.init?.method).toBe('POST');
        expect(JSON.parse(String(calls[0]!.init?.body))).toEqual({ text: 'hi' });
        expect(pair.bot_turn.text).toBe('hello');
    });

    it('sends the regression body with null-ed empty filters', async () => {
        const calls = stubFetch(
            jsonResponse({
                schema_version: 1,
                id: 'r',
                template_id: 't',
                mode: 'individual',
                created_at: 'now',
                groups: [],
            }),
        );
        const template = { id: 't' } as never;
        await new ApiClient('').runRegression(template, { tag: 'skip' });
        const body = JSON.parse(String(calls[0]!.init?.body));
        expect(body).toEqual({ template: { id: 't' }, tag: 'skip', source: null, mode: 'individual' });
    });

    it('turns error payloads into ApiError with code and detail', async () => {
        stubFetch(jsonResponse({ error: 'DuplicateTagError', detail: 'already carries tag' }, 409));
        const attempt = new ApiClient('').addTag('c', 1, 'skip', 'error');
        await expect(attempt).rejects.toMatchObject({
            status: 409,
            code: 'DuplicateTagError',
        });
        await expect(
            new ApiClient('').addTag('c', 1, 'skip', 'error'),
        ).rejects.toBeInstanceOf(ApiError);
    });

    it('survives non-JSON error bodies', async () => {
        stubFetch(new Response('<html>boom</html>', { status: 502, statusText: 'Bad Gateway' }));
        await expect(new ApiClient('').listTasks()).rejects.toMatchObject({
            status: 502,
            code: 'HTTP 502',
        });
    });
});
