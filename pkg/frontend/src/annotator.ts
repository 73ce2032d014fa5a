/**
 * Annotator: browse collected conversations, tag bot utterances (single-word
 * names, error/success polarity), and fork any conversation from a chosen
 * turn — the fork opens in the collector for a fresh continuation.
 */

import type { AppContext, View } from './app.js';
import { describe } from './collector.js';
import { clear, el } from './dom.js';
import type { ConversationJson, Polarity, TurnJson } from './types.js';

export class AnnotatorView implements View {
    private selected: ConversationJson | null = null;
    private listPane = el('div', { class: 'conversation-list' });
    private detailPane = el('div', { class: 'conversation-detail' });
    private banner = el('div', { class: 'banner hidden' });

    constructor(
        private root: HTMLElement,
        private app: AppContext,
    ) {
        this.root.append(
            this.banner,
            el('div', { class: 'split' }, [this.listPane, this.detailPane]),
        );
    }

    async refresh(): Promise<void> {
        const filter = {
            tag: this.app.filters.tag || undefined,
            source: this.app.filters.source,
        };
        const conversations = await this.app.api.listConversations(filter);
        clear(this.listPane);
        if (!conversations.length) {
            this.listPane.append(el('p', { class: 'placeholder' }, ['No conversations match.']));
        }
        for (const conversation of conversations) {
            const item = el('div', { class: 'conversation-item' }, [
                el('span', { class: 'mono' }, [conversation.id]),
                el('span', { class: 'meta' }, [
                    ` ${conversation.source}, ${conversation.turns.length} turns`
                    + (conversation.parent ? `, fork of ${conversation.parent.conversation_id}` : ''),
                ]),
            ]);
            item.addEventListener('click', () => void this.select(conversation.id));
            this.listPane.append(item);
        }
        if (this.selected) {
            await this.select(this.selected.id);
        } else {
            clear(this.detailPane);
            this.detailPane.append(
                el('p', { class: 'placeholder' }, ['Pick a conversation to annotate.']),
            );
        }
    }

    private async select(conversationId: string): Promise<void> {
        this.selected = await this.app.api.getConversation(conversationId);
        this.renderDetail();
    }

    private renderDetail(): void {
        clear(this.detailPane);
        if (!this.selected) {
            return;
        }
        this.detailPane.append(el('h3', {}, [`Conversation ${this.selected.id}`]));
        this.selected.turns.forEach((turn) => {
            this.detailPane.append(this.renderTurn(turn));
        });
    }

    private renderTurn(turn: TurnJson): HTMLElement {
        const hasError = turn.tags.some((t) => t.polarity === 'error');
        const row = el('div', {
            class: `turn-row ${turn.role}${hasError ? ' tagged' : ''}`,
        });
        row.append(
            el('span', { class: 'who' }, [`${turn.index} · ${turn.role}`]),
            el('span', { class: 'text' }, [turn.text]),
        );

        const chips = el('span', { class: 'chips' });
        for (const tag of turn.tags) {
            const chip = el('span', { class: `chip ${tag.polarity}` }, [tag.name]);
            const remove = el('button', { class: 'chip-remove', title: 'remove tag' }, ['×']);
            remove.addEventListener('click', () => void this.removeTag(turn.index, tag.name));
            chip.append(remove);
            chips.append(chip);
        }
        row.append(chips);

        const forkButton = el('button', { class: 'small' }, ['fork from here']);
        forkButton.addEventListener('click', () => void this.fork(turn.index));
        row.append(forkButton);

        if (turn.role === 'bot') {
            row.append(this.tagForm(turn.index));
        }
        return row;
    }

    private tagForm(turnIndex: number): HTMLElement {
        const name = el('input', { type: 'text', placeholder: 'single-word tag' });
        const polarity = el('select');
        polarity.append(
            el('option', { value: 'error' }, ['error']),
            el('option', { value: 'success' }, ['success']),
        );
        const add = el('button', { class: 'small' }, ['tag']);
        const form = el('form', { class: 'tag-form' });
        form.append(name, polarity, add);
        form.addEventListener('submit', (event) => {
            event.preventDefault();
            const value = name.value.trim();
            if (!value || /\s/.test(value)) {
                this.showError('Tags are single words without whitespace.');
                return;
            }
            void this.addTag(turnIndex, value, polarity.value as Polarity);
        });
        return form;
    }

    private async addTag(turnIndex: number, name: string, polarity: Polarity): Promise<void> {
        if (!this.selected) {
            return;
        }
        try {
            const turn = await this.app.api.addTag(this.selected.id, turnIndex, name, polarity);
            this.selected.turns[turnIndex] = turn;
            this.hideError();
            this.renderDetail();
        } catch (error) {
            this.showError(describe(error)); // duplicate tags land here as 409s
        }
    }

    private async removeTag(turnIndex: number, name: string): Promise<void> {
        if (!this.selected) {
            return;
        }
        try {
            const turn = await this.app.api.removeTag(this.selected.id, turnIndex, name);
            this.selected.turns[turnIndex] = turn;
            this.hideError();
            this.renderDetail();
        } catch (error) {
            this.showError(describe(error));
        }
    }

    private async fork(turnIndex: number): Promise<void> {
        if (!this.selected) {
            return;
        }
        try {
            const fork = await this.app.api.forkConversation(this.selected.id, turnIndex);
            this.hideError();
            this.app.switchTo('collect', fork.id); // continue the fork in the collector
        } catch (error) {
            this.showError(describe(error));
        }
    }

    private showError(message: string): void {
        this.banner.textContent = message;
        this.banner.classList.remove('hidden');
    }

    private hideError(): void {
        this.banner.classList.add('hidden');
    }
}
