"""
Prompt-level enforcement: render the rules that apply to one agent as plain
instruction text that can be placed in a downstream agent's prompt.

The template is fixed so that prompt diffs stay reviewable:

    You must obey the following content rules for this website.
    For path /articles/today.html (html):
    - element p:
      - you must not perform: Train, Summarize
      - when you Rephrase, follow: Quote the first sentence verbatim.
"""
from __future__ import annotations

from dataclasses import dataclass

from language.models import (
    AGENT_NAME_RE,
    WILDCARD,
    Action,
    DisallowRule,
    GuideRule,
    LanguageTag,
    PolicyFile,
    describe_action,
)

from .policy import applicable_rules

HEADER = 'You must obey the following content rules for this website.'
NO_RULES = 'No content rules declared for this agent.'
ANY_ACTION = 'any action'
MEANINGS_HEADER = 'Action meanings:'


@dataclass(frozen=True)
class PromptRequest:
    agent: str
    preferred_language: LanguageTag
    fallback: bool = True
    explain_actions: bool = False

    def __post_init__(self):
        if not AGENT_NAME_RE.fullmatch(self.agent or ''):
            raise ValueError(f'invalid agent name {self.agent!r}')


def _group(entries):
    """Group applicable rules by (path, file type) then element, keeping first-seen order."""
    paths: dict = {}
    for entry in entries:
        elements = paths.setdefault((entry.path, entry.file_type), {})
        elements.setdefault(entry.element, []).append(entry.rule)
    return paths


def _disallows_by_element(entries):
    """Disallow rules per (path, element), across file types, the way the engine matches them."""
    found: dict = {}
    for entry in entries:
        if isinstance(entry.rule, DisallowRule):
            found.setdefault((entry.path, entry.element), []).append(entry.rule)
    return found


def _guideline_text(rule: GuideRule, request: PromptRequest) -> str | None:
    for guideline in rule.guidelines:
        if guideline.language == request.preferred_language:
            return guideline.text
    if request.fallback:
        return rule.guidelines[0].text
    return None


def _element_lines(rules, effective, request: PromptRequest, mentioned: list[Action]) -> list[str]:
    """
    `effective` holds every disallow the engine applies to this element, including
    those of `Element: *` on the same path; guidance for those actions is dropped.
    """
    disallows = [r for r in rules if isinstance(r, DisallowRule)]
    lines = []

    forbid_all = any(r.actions.is_all for r in disallows)
    forbidden = list(dict.fromkeys(a for r in disallows for a in r.actions.actions))
    if forbid_all:
        lines.append(f'  - you must not perform: {ANY_ACTION}')
    elif forbidden:
        lines.append('  - you must not perform: ' + ', '.join(str(a) for a in forbidden))
        mentioned.extend(forbidden)

    if any(r.actions.is_all for r in effective):
        return lines
    blocked = {a for r in effective for a in r.actions.actions}

    for rule in rules:
        if not isinstance(rule, GuideRule):
            continue
        text = _guideline_text(rule, request)
        if rule.actions.is_all:
            labels = ['perform any action']
        else:
            guided = [a for a in rule.actions.actions if a not in blocked]
            labels = [str(a) for a in guided]
            mentioned.extend(guided)
        for label in labels:
            if text is None:
                lines.append(f'  - when you {label}: (no guideline available in {request.preferred_language})')
            else:
                lines.append(f'  - when you {label}, follow: {text}')
    return lines


def render_prompt(policy: PolicyFile, request: PromptRequest) -> str:
    """Render the agent's applicable rules; identical inputs give identical text."""
    mentioned: list[Action] = []
    body = []
    entries = applicable_rules(policy, request.agent)
    disallows = _disallows_by_element(entries)
    for (path, file_type), elements in _group(entries).items():
        path_lines = []
        for element, rules in elements.items():
            effective = disallows.get((path, element), []) + (
                disallows.get((path, WILDCARD), []) if element != WILDCARD else []
            )
            lines = _element_lines(rules, effective, request, mentioned)
            if lines:
                path_lines.append(f'- element {element}:')
                path_lines.extend(lines)
        if path_lines:
            body.append(f'For path {path} ({file_type.value}):')
            body.extend(path_lines)

    if not body:
        return NO_RULES

    out = [HEADER, *body]
    if request.explain_actions:
        meanings = [
            f'- {action}: {describe_action(action)}'
            for action in dict.fromkeys(mentioned)
            if describe_action(action)
        ]
        if meanings:
            out.append(MEANINGS_HEADER)
            out.extend(meanings)
    return '\n'.join(out)
