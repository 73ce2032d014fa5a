/**
 * Wire types mirroring the botbench HTTP API and file schemas.
 */

export type Role = 'user' | 'bot';
export type Polarity = 'error' | 'success';
export type Source = 'web' | 'cli' | 'import';
export type ReplayMode = 'individual' | 'total';

export interface TagJson {
    name: string;
    polarity: Polarity;
    note?: string | null;
}

export interface TurnJson {
    index: number;
    role: Role;
    text: string;
    tags: TagJson[];
}

export interface ForkRefJson {
    conversation_id: string;
    fork_turn_index: number;
}

export interface ConversationJson {
    id: string;
    task_id: string;
    template_id: string;
    source: Source;
    parent: ForkRefJson | null;
    turns: TurnJson[];
}

export interface StepJson {
    title: string;
    details: string;
}

export interface TaskJson {
    id: string;
    name: string;
    description: string;
    items: string[];
    steps: StepJson[];
}

export interface TemplateJson {
    id: string;
    name: string;
    preamble_template: string;
    task_format: {
        include_name: boolean;
        include_description: boolean;
        include_items: boolean;
        step_prefix_pattern: string;
    };
    turn_format: {
        user_prefix: string;
        bot_prefix: string;
        separator: string;
    };
    generation: {
        model: string;
        temperature: number;
        max_tokens: number;
        stop: string[];
    };
    extraction: {
        stop_markers: string[];
        trim_whitespace: boolean;
    };
}

export interface TurnPairJson {
    user_turn: TurnJson;
    bot_turn: TurnJson;
}

// --- conversation graph ---

export interface DagMemberJson {
    conversation_id: string;
    turn_index: number;
}

export interface DagNodeJson {
    id: string;
    role: Role;
    text: string;
    members: DagMemberJson[];
    tags: { name: string; polarity: Polarity }[];
}

export interface DagEdgeJson {
    from: string;
    to: string;
    conversations: string[];
}

export interface DagJson {
    schema_version: number;
    nodes: DagNodeJson[];
    edges: DagEdgeJson[];
}

// --- regression testing ---

export interface ContextTurnJson {
    role: Role;
    text: string;
}

export interface CaseJson {
    conversation_id: string;
    turn_index: number;
    tag_names: string[];
    original: string;
    context_before: ContextTurnJson[];
    context_after: ContextTurnJson[];
}

export interface ResultJson {
    conversation_id: string;
    turn_index: number;
    context_before: ContextTurnJson[];
    original: string;
    regenerated: string | null;
    changed: boolean;
    error: string | null;
    tainted: boolean;
    context_after: ContextTurnJson[];
}

export interface ReportGroupJson {
    tag: string;
    results: ResultJson[];
}

export interface ReportJson {
    schema_version: number;
    id: string;
    template_id: string;
    mode: ReplayMode;
    created_at: string;
    groups: ReportGroupJson[];
}

export interface GraphFilter {
    tag?: string;
    source?: Source | '';
}
