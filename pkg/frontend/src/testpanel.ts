/**
 * Test panel: tagged originals with two turns of context on the left (grouped
 * by tag, multi-tag utterances duplicated per group), regenerated results in
 * the center (highlighted exactly when the report marks them changed), and an
 * editable template JSON draft on the right. Invalid drafts block testing
 * with the violations listed.
 */

import type { AppContext, View } from './app.js';
import { describe } from './collector.js';
import { clear, el } from './dom.js';
import type { CaseJson, ResultJson, TemplateJson } from './types.js';
import {
    type CaseRow,
    cellClasses,
    centerCell,
    groupCases,
    indexReport,
    rowKey,
} from './viewmodel.js';

export class TestPanelView implements View {
    private cases: CaseJson[] = [];
    private results = new Map<string, ResultJson>();
    private running = false;

    private groupsPane = el('div', { class: 'case-groups' });
    private editor = el('textarea', { class: 'template-editor', rows: '24' });
    private templateSelect = el('select');
    private banner = el('div', { class: 'banner hidden' });
    private violations = el('div', { class: 'violations hidden' });
    private testAllButton = el('button', {}, ['Test All']);
    private tagInput = el('input', { type: 'text', placeholder: 'tag filter' });

    constructor(
        private root: HTMLElement,
        private app: AppContext,
    ) {
        this.templateSelect.addEventListener('change', () => void this.loadDraft());
        this.testAllButton.addEventListener('click', () => void this.testAll());
        const apply = el('button', {}, ['Apply filter']);
        apply.addEventListener('click', () => {
            this.app.filters.tag = this.tagInput.value.trim();
            void this.refresh();
        });
        this.root.append(
            el('div', { class: 'toolbar' }, [
                el('label', {}, ['Tag: ', this.tagInput]),
                apply,
                el('label', {}, ['Template: ', this.templateSelect]),
                this.testAllButton,
            ]),
            this.banner,
            el('div', { class: 'split' }, [
                this.groupsPane,
                el('div', { class: 'editor-pane' }, [
                    el('h3', {}, ['Template draft']),
                    this.editor,
                    this.violations,
                ]),
            ]),
        );
    }

    async refresh(): Promise<void> {
        this.tagInput.value = this.app.filters.tag;
        const [templates, cases] = await Promise.all([
            this.app.api.listTemplates(),
            this.app.api.regressionCases({
                tag: this.app.filters.tag || undefined,
                source: this.app.filters.source,
            }),
        ]);
        const current = this.templateSelect.value;
        clear(this.templateSelect);
        for (const template of templates) {
            this.templateSelect.append(el('option', { value: template.id }, [template.id]));
        }
        if (templates.some((t) => t.id === current)) {
            this.templateSelect.value = current;
        }
        if (!this.editor.value) {
            await this.loadDraft();
        }
        this.cases = cases;
        this.results.clear();
        this.renderGroups();
    }

    private async loadDraft(): Promise<void> {
        const templates = await this.app.api.listTemplates();
        const selected = templates.find((t) => t.id === this.templateSelect.value) ?? templates[0];
        if (selected) {
            this.editor.value = JSON.stringify(selected, null, 2);
        }
    }

    /** Parse the draft; list violations and return null when unusable. */
    private parseDraft(): TemplateJson | null {
        try {
            const draft = JSON.parse(this.editor.value) as TemplateJson;
            this.hideViolations();
            return draft;
        } catch (error) {
            this.showViolations(`Template draft is not valid JSON: ${describe(error)}`);
            return null;
        }
    }

    private async run(filterTag: string | undefined, rowsToUpdate: 'all' | string): Promise<void> {
        const draft = this.parseDraft();
        if (!draft || this.running) {
            return;
        }
        this.running = true;
        this.testAllButton.disabled = true;
        try {
            const report = await this.app.api.runRegression(draft, {
                tag: filterTag,
                source: this.app.filters.source,
            });
            const fresh = indexReport(report);
            if (rowsToUpdate === 'all') {
                this.results = fresh;
            } else {
                const result = fresh.get(rowsToUpdate);
                if (result) {
                    this.results.set(rowsToUpdate, result);
                }
            }
            this.hideViolations();
            this.banner.classList.add('hidden');
            this.renderGroups();
        } catch (error) {
            // 400s are template violations and block the run; anything else
            // is a backend problem worth a banner.
            const message = describe(error);
            if (message.includes('InvalidTemplateError') || message.includes('ValueError')) {
                this.showViolations(message);
            } else {
                this.banner.textContent = message;
                this.banner.classList.remove('hidden');
            }
        } finally {
            this.running = false;
            this.testAllButton.disabled = false;
        }
    }

    private testAll(): Promise<void> {
        return this.run(this.app.filters.tag || undefined, 'all');
    }

    private testOne(row: CaseRow): Promise<void> {
        return this.run(row.tag, row.key);
    }

    private renderGroups(): void {
        clear(this.groupsPane);
        const groups = groupCases(this.cases);
        if (!groups.length) {
            this.groupsPane.append(
                el('p', { class: 'placeholder' }, ['No tagged bot utterances match the filter.']),
            );
            return;
        }
        for (const group of groups) {
            const section = el('section', { class: 'case-group' });
            section.append(el('h3', {}, [`#${group.tag} (${group.rows.length})`]));
            for (const row of group.rows) {
                section.append(this.renderRow(row));
            }
            this.groupsPane.append(section);
        }
    }

    private renderRow(row: CaseRow): HTMLElement {
        const testCase = row.testCase;
        const left = el('div', { class: 'case-original' });
        for (const turn of testCase.context_before) {
            left.append(el('p', { class: `context ${turn.role}` }, [`${turn.role}: ${turn.text}`]));
        }
        left.append(el('p', { class: 'original' }, [`bot: ${testCase.original}`]));
        for (const turn of testCase.context_after) {
            left.append(el('p', { class: `context ${turn.role}` }, [`${turn.role}: ${turn.text}`]));
        }
        const testButton = el('button', { class: 'small' }, ['Test']);
        testButton.addEventListener('click', () => void this.testOne(row));
        left.append(testButton);

        const center = el('div', { class: 'case-result' });
        const cell = centerCell(row, this.results);
        if (cell === null) {
            center.append(el('p', { class: 'placeholder' }, ['not run yet']));
        } else {
            center.append(el('p', { class: cellClasses(cell).join(' ') }, [cell.text]));
        }

        return el(
            'div',
            {
                class: 'case-row',
                'data-key': row.key,
                'data-case': rowKey('', testCase.conversation_id, testCase.turn_index),
            },
            [
                el('div', { class: 'case-meta mono' }, [
                    `${testCase.conversation_id} · turn ${testCase.turn_index}`,
                ]),
                left,
                center,
            ],
        );
    }

    private showViolations(message: string): void {
        this.violations.textContent = message;
        this.violations.classList.remove('hidden');
    }

    private hideViolations(): void {
        this.violations.classList.add('hidden');
    }
}
