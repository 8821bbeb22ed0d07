"""
Rule-checking logic consulted by an agent before it acts on content.

Agent selection is most-specific-wins: blocks that name the agent shadow
wildcard blocks entirely, and several blocks naming the same agent merge.
Paths match exactly after normalization, elements match by declared name
or the `*` element. Disallow beats Guide, and anything not covered by a
rule is allowed.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum

from language.models import (
    AGENT_NAME_RE,
    Action,
    DisallowRule,
    ElementBlock,
    FileType,
    GuideRule,
    LanguageTag,
    PathBlock,
    PolicyFile,
    Rule,
    UserAgentBlock,
)

logger = logging.getLogger(__name__)

_SLASHES_RE = re.compile(r'/{2,}')


class DecisionKind(str, Enum):
    DISALLOWED = 'disallowed'
    GUIDED = 'guided'
    ALLOWED = 'allowed'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Query:
    """The agent, resource path, element and action an agent is about to use."""
    agent: str
    path: str
    element: str
    action: Action

    def __post_init__(self):
        if not AGENT_NAME_RE.fullmatch(self.agent or ''):
            raise ValueError(f'invalid agent name {self.agent!r}')
        if not self.path.startswith('/'):
            raise ValueError(f"query path {self.path!r} must begin with '/'")
        if not self.element:
            raise ValueError('query element is empty')


@dataclass(frozen=True)
class MatchTrace:
    """The blocks and rules that took part in a decision, in source order."""
    agent_blocks: tuple[UserAgentBlock, ...] = ()
    paths: tuple[PathBlock, ...] = ()
    elements: tuple[ElementBlock, ...] = ()
    deciding_rules: tuple[Rule, ...] = ()

    def entries(self):
        """Yield (role, node) pairs for every node in the trace."""
        for role, nodes in (
            ('agent-block', self.agent_blocks),
            ('path', self.paths),
            ('element', self.elements),
            ('rule', self.deciding_rules),
        ):
            for node in nodes:
                yield role, node


@dataclass(frozen=True)
class Decision:
    kind: DecisionKind
    guidelines: dict[LanguageTag, str] = field(default_factory=dict)
    trace: MatchTrace = field(default_factory=MatchTrace)

    def __post_init__(self):
        if (self.kind is DecisionKind.GUIDED) != bool(self.guidelines):
            raise ValueError('only a guided decision carries guidelines, and it carries at least one')
        if (self.kind is DecisionKind.ALLOWED) == bool(self.trace.deciding_rules):
            raise ValueError('deciding rules must be present exactly when the decision is not allowed')


@dataclass(frozen=True)
class ApplicableRule:
    path: str
    file_type: FileType
    element: str
    rule: Rule


def normalize_path(path: str) -> str:
    """Collapse repeated slashes and drop one trailing slash (the root stays `/`)."""
    collapsed = _SLASHES_RE.sub('/', path)
    if len(collapsed) > 1 and collapsed.endswith('/'):
        collapsed = collapsed[:-1]
    return collapsed


def select_agent_blocks(policy: PolicyFile, agent: str) -> list[UserAgentBlock]:
    named = [block for block in policy.blocks if block.agents.names_exactly(agent)]
    if named:
        return named
    return [block for block in policy.blocks if block.agents.is_all]


def evaluate(policy: PolicyFile, query: Query) -> Decision:
    blocks = select_agent_blocks(policy, query.agent)
    target = normalize_path(query.path)
    paths = [p for block in blocks for p in block.paths if normalize_path(p.path) == target]
    elements = [e for p in paths for e in p.elements if e.name == query.element or e.is_wildcard]
    trace = dict(agent_blocks=tuple(blocks), paths=tuple(paths), elements=tuple(elements))

    covering = [rule for e in elements for rule in e.rules if rule.actions.covers(query.action)]
    disallows = tuple(r for r in covering if isinstance(r, DisallowRule))
    guides = tuple(r for r in covering if isinstance(r, GuideRule))

    if disallows:
        decision = Decision(DecisionKind.DISALLOWED, trace=MatchTrace(**trace, deciding_rules=disallows))
    elif guides:
        guidelines = {}
        for guide in guides:
            for guideline in guide.guidelines:
                guidelines[guideline.language] = guideline.text
        decision = Decision(DecisionKind.GUIDED, guidelines, MatchTrace(**trace, deciding_rules=guides))
    else:
        decision = Decision(DecisionKind.ALLOWED, trace=MatchTrace(**trace))

    logger.debug('%s %s %s %s -> %s', query.agent, query.path, query.element, query.action, decision.kind.value)
    return decision


def applicable_rules(policy: PolicyFile, agent: str) -> list[ApplicableRule]:
    """Every rule reachable for `agent`, flattened in source order."""
    return [
        ApplicableRule(normalize_path(path.path), path.file_type, element.name, rule)
        for block in select_agent_blocks(policy, agent)
        for path in block.paths
        for element in path.elements
        for rule in element.rules
    ]
