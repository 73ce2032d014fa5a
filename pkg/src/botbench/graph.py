"""Merged conversation graph: every conversation is a directed path, and
identical long utterances across conversations collapse into shared nodes.

Merging can create directed cycles (utterance A before B in one conversation,
B before A in another); decycling splits merged nodes back apart until the
graph is acyclic while preserving each conversation's path. Short utterances
(normalized length below the threshold, e.g. "OK") never merge: they recur in
unrelated contexts and carry no structural signal.
"""

from __future__ import annotations

import itertools
import json
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable

from .errors import IrreducibleCycleError
from .model import Conversation, Tag, Turn

DEFAULT_MERGE_THRESHOLD = 20

_unique_keys = itertools.count()


def normalize_utterance(text: str) -> str:
    """Unicode NFC, outer whitespace trimmed, internal whitespace runs
    collapsed to single spaces. Case-sensitive."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def merge_key(turn: Turn, threshold: int = DEFAULT_MERGE_THRESHOLD):
    """Equivalence key for node merging: (role, normalized text) for long
    utterances; a fresh never-equal key for short ones."""
    norm = normalize_utterance(turn.text)
    if len(norm) < threshold:
        return ("unique", next(_unique_keys))
    return ("text", turn.role, norm)


@dataclass
class Member:
    """One turn folded into a node. Tags ride along so node splits can
    redistribute them; exports drop them (node-level tags are the union)."""

    conversation_id: str
    turn_index: int
    tags: list[Tag] = field(default_factory=list)

    def key(self) -> tuple[str, int]:
        return (self.conversation_id, self.turn_index)

    def to_dict(self) -> dict:
        return {"conversation_id": self.conversation_id, "turn_index": self.turn_index}


@dataclass
class DagNode:
    id: str
    role: str
    display_text: str
    members: list[Member]
    tags: list[Tag] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "role": self.role,
            "text": self.display_text,
            "members": [m.to_dict() for m in self.members],
            "tags": [{"name": t.name, "polarity": t.polarity} for t in self.tags],
        }


@dataclass
class DagEdge:
    source: str  # node id; JSON key "from"
    target: str  # node id; JSON key "to"
    conversations: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "from": self.source,
            "to": self.target,
            "conversations": sorted(self.conversations),
        }


@dataclass
class ConversationDag:
    nodes: list[DagNode]
    edges: list[DagEdge]

    def node_by_id(self, node_id: str) -> DagNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def to_dict(self) -> dict:
        order = _topological_ids(self)
        by_id = {n.id: n for n in self.nodes}
        return {
            "schema_version": 1,
            "nodes": [by_id[nid].to_dict() for nid in order],
            "edges": [e.to_dict() for e in sorted(self.edges, key=lambda e: (e.source, e.target))],
        }


class _Draft:
    """Mutable node-under-construction: a bag of members sharing role+text."""

    __slots__ = ("role", "text", "members")

    def __init__(self, role: str, text: str, members: list[Member]):
        self.role = role
        self.text = text
        self.members = members

    def min_key(self) -> tuple[str, int]:
        return min(m.key() for m in self.members)


def build_dag(
    conversations: Iterable[Conversation],
    threshold: int = DEFAULT_MERGE_THRESHOLD,
) -> ConversationDag:
    """Merge conversations into an acyclic graph of shared utterances.

    Nodes are merge-key equivalence classes, except that two turns of the same
    conversation never share a node: class members are assigned first-fit in
    (conversation_id, turn_index) order, opening a new node whenever the
    conversation is already represented. Edges follow consecutive turns and
    carry the conversation ids that traverse them; decycling runs last.
    """
    conversations = list(conversations)
    buckets: dict[tuple[str, str], list[Member]] = {}
    singles: list[_Draft] = []
    turn_counts: dict[str, int] = {}
    for conv in conversations:
        turn_counts[conv.id] = len(conv.turns)
        for turn in conv.turns:
            norm = normalize_utterance(turn.text)
            member = Member(conv.id, turn.index, list(turn.tags))
            if len(norm) < threshold:
                singles.append(_Draft(turn.role, norm, [member]))
            else:
                buckets.setdefault((turn.role, norm), []).append(member)

    drafts: list[_Draft] = list(singles)
    for (role, norm), members in buckets.items():
        open_drafts: list[_Draft] = []
        for member in sorted(members, key=Member.key):
            placed = None
            for draft in open_drafts:
                if all(m.conversation_id != member.conversation_id for m in draft.members):
                    placed = draft
                    break
            if placed is None:
                placed = _Draft(role, norm, [])
                open_drafts.append(placed)
            placed.members.append(member)
        drafts.extend(open_drafts)

    return _decycle_drafts(drafts, turn_counts)


def decycle(dag: ConversationDag) -> ConversationDag:
    """Split merged nodes until no directed cycle remains.

    Repeatedly: find a cycle, take its multi-member node with the
    lexicographically smallest (normalized text, role), and split it into one
    node per member, rewiring edges from each member's own conversation
    adjacency. Every split strictly reduces total multi-membership, so the
    loop terminates (all-singleton nodes form disjoint paths). A cycle without
    any multi-member node cannot be produced by build_dag and raises.
    """
    drafts = [
        _Draft(n.role, n.display_text, [Member(m.conversation_id, m.turn_index, list(m.tags)) for m in n.members])
        for n in dag.nodes
    ]
    turn_counts: dict[str, int] = {}
    for draft in drafts:
        for m in draft.members:
            turn_counts[m.conversation_id] = max(
                turn_counts.get(m.conversation_id, 0), m.turn_index + 1
            )
    return _decycle_drafts(drafts, turn_counts)


def _decycle_drafts(drafts: list[_Draft], turn_counts: dict[str, int]) -> ConversationDag:
    while True:
        drafts.sort(key=_Draft.min_key)
        assignment = {m.key(): i for i, draft in enumerate(drafts) for m in draft.members}
        adjacency = _adjacency(drafts, assignment, turn_counts)
        cycle = _find_cycle(len(drafts), adjacency)
        if cycle is None:
            break
        candidates = [drafts[i] for i in cycle if len(drafts[i].members) >= 2]
        if not candidates:
            raise IrreducibleCycleError(
                "cycle through single-member nodes only; graph was not built by build_dag"
            )
        victim = min(candidates, key=lambda d: (d.text, d.role))
        drafts.remove(victim)
        drafts.extend(_Draft(victim.role, victim.text, [m]) for m in victim.members)
    return _assemble(drafts, turn_counts)


def _adjacency(
    drafts: list[_Draft],
    assignment: dict[tuple[str, int], int],
    turn_counts: dict[str, int],
) -> list[list[int]]:
    adjacency: list[set[int]] = [set() for _ in drafts]
    for cid, count in turn_counts.items():
        for i in range(count - 1):
            adjacency[assignment[(cid, i)]].add(assignment[(cid, i + 1)])
    return [sorted(out) for out in adjacency]


def _find_cycle(count: int, adjacency: list[list[int]]) -> list[int] | None:
    """Return node indices along one directed cycle, or None. Iterative
    three-color DFS, deterministic given the adjacency order."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * count
    parent: dict[int, int] = {}
    for start in range(count):
        if color[start] != WHITE:
            continue
        color[start] = GRAY
        stack: list[tuple[int, Iterable[int]]] = [(start, iter(adjacency[start]))]
        while stack:
            node, neighbors = stack[-1]
            advanced = False
            for nxt in neighbors:
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent[nxt] = node
                    stack.append((nxt, iter(adjacency[nxt])))
                    advanced = True
                    break
                if color[nxt] == GRAY:
                    cycle = [nxt]
                    cursor = node
                    while cursor != nxt:
                        cycle.append(cursor)
                        cursor = parent[cursor]
                    cycle.reverse()
                    return cycle
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def _assemble(drafts: list[_Draft], turn_counts: dict[str, int]) -> ConversationDag:
    drafts = sorted(drafts, key=_Draft.min_key)
    width = max(4, len(str(max(len(drafts) - 1, 0))))
    nodes = []
    for i, draft in enumerate(drafts):
        members = sorted(draft.members, key=Member.key)
        seen: set[tuple[str, str]] = set()
        tags = []
        for member in members:
            for tag in member.tags:
                if (tag.name, tag.polarity) not in seen:
                    seen.add((tag.name, tag.polarity))
                    tags.append(Tag(name=tag.name, polarity=tag.polarity))
        tags.sort(key=lambda t: (t.name, t.polarity))
        nodes.append(
            DagNode(
                id=f"n{i:0{width}d}",
                role=draft.role,
                display_text=draft.text,
                members=members,
                tags=tags,
            )
        )
    assignment = {m.key(): node.id for node in nodes for m in node.members}
    edges: dict[tuple[str, str], DagEdge] = {}
    for cid, count in sorted(turn_counts.items()):
        for i in range(count - 1):
            pair = (assignment[(cid, i)], assignment[(cid, i + 1)])
            edge = edges.get(pair)
            if edge is None:
                edge = edges[pair] = DagEdge(source=pair[0], target=pair[1])
            edge.conversations.add(cid)
    return ConversationDag(nodes=nodes, edges=sorted(edges.values(), key=lambda e: (e.source, e.target)))


def _topological_ids(dag: ConversationDag) -> list[str]:
    """Kahn's algorithm with an id-ordered frontier: topological order,
    ties broken by node id."""
    import heapq

    indegree = {n.id: 0 for n in dag.nodes}
    out: dict[str, list[str]] = {n.id: [] for n in dag.nodes}
    for edge in dag.edges:
        out[edge.source].append(edge.target)
        indegree[edge.target] += 1
    frontier = [nid for nid, deg in indegree.items() if deg == 0]
    heapq.heapify(frontier)
    order = []
    while frontier:
        nid = heapq.heappop(frontier)
        order.append(nid)
        for nxt in out[nid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(frontier, nxt)
    # A valid dag consumes every node; leftovers would mean a cycle slipped
    # through, so surface them at the end rather than dropping nodes.
    if len(order) < len(dag.nodes):
        order.extend(sorted(nid for nid, deg in indegree.items() if deg > 0))
    return order


def export_dag(dag: ConversationDag, format: str = "json") -> bytes:
    """Serialize the graph for the UI/CLI: deterministic bytes for identical
    graphs. JSON nodes come out in topological order (ties by id); DOT labels
    truncate to 40 chars and tagged nodes are filled orange."""
    if format == "json":
        return (json.dumps(dag.to_dict(), ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if format == "dot":
        return _export_dot(dag)
    raise ValueError(f"unknown export format {format!r}; use json or dot")


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _export_dot(dag: ConversationDag) -> bytes:
    by_id = {n.id: n for n in dag.nodes}
    lines = ["digraph conversations {", "  rankdir=TB;", "  node [shape=box];"]
    for nid in _topological_ids(dag):
        node = by_id[nid]
        label = _dot_escape(node.display_text[:40])
        style = ', style=filled, fillcolor=orange' if node.tags else ""
        lines.append(f'  "{nid}" [label="{label}"{style}];')
    for edge in sorted(dag.edges, key=lambda e: (e.source, e.target)):
        lines.append(f'  "{edge.source}" -> "{edge.target}";')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
