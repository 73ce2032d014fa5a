/**
 * Test-panel view model: grouping tagged cases by tag (multi-tag cases are
 * duplicated into every group, mirroring the report layout) and mapping
 * replay results onto center-column cells. Highlighting follows the report's
 * `changed` flag one-to-one; the client never re-computes diffs.
 */

import type { CaseJson, ReportJson, ResultJson } from './types.js';

export interface CaseRow {
    key: string; // `${tag}|${conversation_id}|${turn_index}`
    tag: string;
    testCase: CaseJson;
}

export interface CaseGroup {
    tag: string;
    rows: CaseRow[];
}

export function rowKey(tag: string, conversationId: string, turnIndex: number): string {
    return `${tag}|${conversationId}|${turnIndex}`;
}

/** One group per tag, ordered by tag; rows ordered by (conversation, turn). */
export function groupCases(cases: CaseJson[]): CaseGroup[] {
    const groups = new Map<string, CaseRow[]>();
    for (const testCase of cases) {
        for (const tag of testCase.tag_names) {
            if (!groups.has(tag)) {
                groups.set(tag, []);
            }
            groups.get(tag)!.push({
                key: rowKey(tag, testCase.conversation_id, testCase.turn_index),
                tag,
                testCase,
            });
        }
    }
    return [...groups.keys()].sort().map((tag) => ({
        tag,
        rows: groups
            .get(tag)!
            .sort((a, b) =>
                a.testCase.conversation_id === b.testCase.conversation_id
                    ? a.testCase.turn_index - b.testCase.turn_index
                    : a.testCase.conversation_id < b.testCase.conversation_id
                      ? -1
                      : 1,
            ),
    }));
}

/** Index a report's results by (group tag, conversation, turn). */
export function indexReport(report: ReportJson): Map<string, ResultJson> {
    const index = new Map<string, ResultJson>();
    for (const group of report.groups) {
        for (const result of group.results) {
            index.set(rowKey(group.tag, result.conversation_id, result.turn_index), result);
        }
    }
    return index;
}

export interface CenterCell {
    text: string;
    changed: boolean;
    error: string | null;
}

/** The regenerated-utterance cell for a row, or null before any run. */
export function centerCell(row: CaseRow, results: Map<string, ResultJson>): CenterCell | null {
    const result = results.get(row.key);
    if (!result) {
        return null;
    }
    if (result.error !== null) {
        return { text: result.error, changed: false, error: result.error };
    }
    return { text: result.regenerated ?? '', changed: result.changed, error: null };
}

/** Cell styling: highlighted exactly when the report marked it changed. */
export function cellClasses(cell: CenterCell): string[] {
    const classes = ['result-cell'];
    if (cell.error !== null) {
        classes.push('errored');
    } else if (cell.changed) {
        classes.push('changed');
    } else {
        classes.push('unchanged');
    }
    return classes;
}
