"""
Semantic checks that run on a parsed policy.

Codes V001-V010 are stable and documented in docs/language-reference.md:

    V001  html element name outside the supported CSS selector subset
    V002  json/xml element name is not dot notation
    V003  malformed language tag
    V004  action both disallowed and guided on one element
    V005  duplicate path inside one user-agent block
    V006  duplicate element name inside one path block
    V007  wildcard guide next to another guide on one element
    V008  agent, or `*`, regulated by more than one user-agent block
    V009  extension (non-curated) action
    V010  '%' not followed by two hex digits in a path
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from enforcement.policy import normalize_path
from language.diagnostics import Diagnostic, DiagnosticCollector, has_errors
from language.models import WILDCARD, DisallowRule, FileType, GuideRule, Mode, PolicyFile, SourceSpan

from .selectors import SelectorError, check_selector

logger = logging.getLogger(__name__)

UNSUPPORTED_SELECTOR = 'V001'
BAD_OBJECT_PATH = 'V002'
BAD_LANGUAGE_TAG = 'V003'
DISALLOW_GUIDE_OVERLAP = 'V004'
DUPLICATE_PATH = 'V005'
DUPLICATE_ELEMENT = 'V006'
OVERLAPPING_GUIDES = 'V007'
REPEATED_AGENT = 'V008'
EXTENSION_ACTION = 'V009'
BAD_PERCENT_ENCODING = 'V010'

_OBJECT_PATH_RE = re.compile(r'[a-zA-Z0-9_-]+(?:\.[a-zA-Z0-9_-]+)*')
_BAD_PERCENT_RE = re.compile(r'%(?![0-9a-fA-F]{2})')

# Stand-in position for nodes built in memory rather than parsed.
_NOWHERE = SourceSpan(1, 1, 0)


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def is_clean(self) -> bool:
        return not has_errors(self.diagnostics)


def _where(node) -> SourceSpan:
    return node.span or _NOWHERE


class _Validator:

    def __init__(self, policy: PolicyFile, mode: Mode):
        self.policy = policy
        self.strict = Mode(mode) is Mode.STRICT
        self.diag = DiagnosticCollector()

    def run(self) -> ValidationReport:
        self._agents()
        for block in self.policy.blocks:
            seen_paths = set()
            for path in block.paths:
                self._path(path, seen_paths)
        return ValidationReport(self.diag.diagnostics)

    def _agents(self) -> None:
        seen = set()
        for block in self.policy.blocks:
            names = (WILDCARD,) if block.agents.is_all else block.agents.names
            for name in names:
                if name in seen:
                    self.diag.warning(
                        REPEATED_AGENT,
                        f'agent {name!r} appears in more than one User-agent block; their rules are merged',
                        _where(block),
                    )
                seen.add(name)

    def _path(self, path, seen_paths) -> None:
        normalized = normalize_path(path.path)
        if normalized in seen_paths:
            self.diag.warning(
                DUPLICATE_PATH, f'path {path.path!r} is already declared in this User-agent block', _where(path),
            )
        seen_paths.add(normalized)
        if _BAD_PERCENT_RE.search(path.path):
            self.diag.warning(
                BAD_PERCENT_ENCODING, f"path {path.path!r} has a '%' not followed by two hex digits", _where(path),
            )

        seen_elements = set()
        for element in path.elements:
            if element.name in seen_elements:
                self.diag.warning(
                    DUPLICATE_ELEMENT, f'element {element.name!r} is already declared under this path', _where(element),
                )
            seen_elements.add(element.name)
            self._element_name(element, path.file_type)
            self._rules(element)

    def _element_name(self, element, file_type: FileType) -> None:
        if element.is_wildcard:
            return
        if file_type is FileType.HTML:
            try:
                check_selector(element.name)
            except SelectorError as exc:
                self.diag.report(
                    UNSUPPORTED_SELECTOR,
                    f'element {element.name!r} is not a supported CSS selector ({exc})',
                    _where(element),
                    as_error=self.strict,
                )
        elif not _OBJECT_PATH_RE.fullmatch(element.name):
            self.diag.error(
                BAD_OBJECT_PATH,
                f'element {element.name!r} must use dot notation (e.g. author.name) for {file_type.value} paths',
                _where(element),
            )

    def _rules(self, element) -> None:
        disallows = [r for r in element.rules if isinstance(r, DisallowRule)]
        guides = [r for r in element.rules if isinstance(r, GuideRule)]

        for rule in element.rules:
            extensions = rule.actions.extensions()
            if extensions:
                listed = ', '.join(str(a) for a in extensions)
                self.diag.warning(EXTENSION_ACTION, f'extension action(s) outside the curated list: {listed}', _where(rule))
            if isinstance(rule, GuideRule):
                for guideline in rule.guidelines:
                    if not guideline.language.is_well_formed:
                        self.diag.error(
                            BAD_LANGUAGE_TAG,
                            f'language tag {guideline.language.raw!r} should look like en or en-US',
                            _where(rule),
                        )

        for guide in guides:
            overlap = self._overlap(guide, disallows)
            if overlap:
                self.diag.warning(
                    DISALLOW_GUIDE_OVERLAP,
                    f'{overlap} is both disallowed and guided on element {element.name!r}; Disallow wins',
                    _where(guide),
                )

        if len(guides) > 1:
            for guide in guides:
                if guide.actions.is_all:
                    self.diag.warning(
                        OVERLAPPING_GUIDES,
                        f"'Guide: *' on element {element.name!r} overlaps the other Guide blocks",
                        _where(guide),
                    )

    @staticmethod
    def _overlap(guide: GuideRule, disallows) -> str:
        if not disallows:
            return ''
        if guide.actions.is_all:
            if any(d.actions.is_all for d in disallows):
                return 'every action'
            return ', '.join(dict.fromkeys(str(a) for d in disallows for a in d.actions.actions))
        hits = [a for a in guide.actions.actions if any(d.actions.covers(a) for d in disallows)]
        return ', '.join(str(a) for a in hits)


def validate(policy: PolicyFile, mode: Mode = Mode.STRICT) -> ValidationReport:
    """Run every semantic rule over `policy`; never raises for policy content."""
    report = _Validator(policy, mode).run()
    logger.debug('validated %s: %d diagnostic(s)', policy.source_name, len(report.diagnostics))
    return report
