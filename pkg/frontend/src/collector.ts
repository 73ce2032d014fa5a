/**
 * Collector: chat with the bot under a chosen task/template pair. Each send
 * posts the user utterance and renders the generated bot reply from the same
 * response; while a request is in flight the input is disabled, and on
 * backend errors the input text is preserved under an inline banner.
 */

import { ApiError } from './api.js';
import type { AppContext, View } from './app.js';
import { clear, el } from './dom.js';
import type { ConversationJson, TurnJson } from './types.js';

export class CollectorView implements View {
    private conversation: ConversationJson | null = null;
    private inFlight = false;

    private taskSelect = el('select');
    private templateSelect = el('select');
    private messages = el('div', { class: 'messages' });
    private input = el('input', { type: 'text', placeholder: 'Say something to the bot…' });
    private sendButton = el('button', {}, ['Send']);
    private banner = el('div', { class: 'banner hidden' });
    private header = el('div', { class: 'conversation-header' });

    constructor(
        private root: HTMLElement,
        private app: AppContext,
    ) {
        this.mount();
    }

    private mount(): void {
        const startButton = el('button', {}, ['Start conversation']);
        startButton.addEventListener('click', () => void this.startConversation());
        const form = el('form', { class: 'chat-form' });
        form.append(this.input, this.sendButton);
        form.addEventListener('submit', (event) => {
            event.preventDefault();
            void this.send();
        });
        this.root.append(
            el('div', { class: 'toolbar' }, [
                el('label', {}, ['Task: ', this.taskSelect]),
                el('label', {}, ['Template: ', this.templateSelect]),
                startButton,
            ]),
            this.header,
            this.banner,
            this.messages,
            form,
        );
    }

    async refresh(): Promise<void> {
        const [tasks, templates] = await Promise.all([
            this.app.api.listTasks(),
            this.app.api.listTemplates(),
        ]);
        for (const [select, options] of [
            [this.taskSelect, tasks.map((t) => t.id)],
            [this.templateSelect, templates.map((t) => t.id)],
        ] as const) {
            const current = select.value;
            clear(select);
            for (const id of options) {
                select.append(el('option', { value: id }, [id]));
            }
            if (options.includes(current)) {
                select.value = current;
            }
        }
        if (this.app.activeConversationId) {
            this.conversation = await this.app.api.getConversation(this.app.activeConversationId);
        }
        this.renderConversation();
    }

    private async startConversation(): Promise<void> {
        if (!this.taskSelect.value || !this.templateSelect.value) {
            this.showError('Create a task and a template first.');
            return;
        }
        try {
            this.conversation = await this.app.api.createConversation(
                this.taskSelect.value,
                this.templateSelect.value,
            );
            this.app.activeConversationId = this.conversation.id;
            this.hideError();
            this.renderConversation();
        } catch (error) {
            this.showError(describe(error));
        }
    }

    private async send(): Promise<void> {
        const text = this.input.value;
        if (!text.trim()) {
            this.showError('Type an utterance first.'); // rejected client-side
            return;
        }
        if (!this.conversation) {
            this.showError('Start a conversation first.');
            return;
        }
        if (this.inFlight) {
            return;
        }
        this.setInFlight(true);
        try {
            const pair = await this.app.api.submitTurn(this.conversation.id, text);
            this.conversation.turns.push(pair.user_turn, pair.bot_turn);
            this.input.value = '';
            this.hideError();
            this.renderConversation();
        } catch (error) {
            // no phantom bot bubble: nothing was appended server-side
            this.showError(describe(error));
        } finally {
            this.setInFlight(false);
        }
    }

    private setInFlight(value: boolean): void {
        this.inFlight = value;
        this.input.disabled = value;
        this.sendButton.disabled = value;
    }

    private renderConversation(): void {
        clear(this.header);
        clear(this.messages);
        if (!this.conversation) {
            this.messages.append(el('p', { class: 'placeholder' }, ['No conversation yet.']));
            return;
        }
        this.header.append(
            el('span', { class: 'mono' }, [this.conversation.id]),
            ` — ${this.conversation.task_id} / ${this.conversation.template_id}`,
        );
        for (const turn of this.conversation.turns) {
            this.messages.append(bubble(turn));
        }
        this.messages.scrollTop = this.messages.scrollHeight;
    }

    private showError(message: string): void {
        this.banner.textContent = message;
        this.banner.classList.remove('hidden');
    }

    private hideError(): void {
        this.banner.classList.add('hidden');
    }
}

function bubble(turn: TurnJson): HTMLElement {
    return el('div', { class: `bubble ${turn.role}` }, [
        el('span', { class: 'who' }, [turn.role]),
        el('span', { class: 'text' }, [turn.text]),
    ]);
}

export function describe(error: unknown): string {
    if (error instanceof ApiError) {
        return `${error.code}: ${error.message}`;
    }
    return error instanceof Error ? error.message : String(error);
}
