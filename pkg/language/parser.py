"""
Parser and canonical printer for ai.txt source text.

The grammar is line oriented: every non-blank, non-comment line starts with
a keyword and its nesting level is given by indentation. The parser infers
the indentation unit (two spaces, four spaces or a tab) from the first
indented line and requires every later line to use whole multiples of it.
Keyword context independently decides where a line attaches, so a line with
the wrong depth is reported but still placed where its keyword belongs.

Parsing never raises on bad input; everything is reported as diagnostics.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from common.exceptions import UnknownAction

from .diagnostics import Diagnostic, DiagnosticCollector, Severity
from .models import (
    AGENT_NAME_RE,
    FORBIDDEN_CHAR_RE,
    LANGUAGE_TAG_RE,
    PATH_RE,
    WILDCARD,
    ActionList,
    AgentSelector,
    DisallowRule,
    ElementBlock,
    ExtensionAction,
    FileType,
    Guideline,
    GuideRule,
    IndentUnit,
    LanguageTag,
    Mode,
    PathBlock,
    PolicyFile,
    SourceSpan,
    UserAgentBlock,
    action_from_string,
)

logger = logging.getLogger(__name__)

UNKNOWN_KEYWORD = 'P001'
BAD_DEPTH = 'P002'
BAD_AGENT_NAME = 'P003'
BAD_PATH = 'P004'
BAD_FILE_TYPE = 'P005'
EMPTY_ELEMENT = 'P006'
EMPTY_GUIDE = 'P007'
UNPAIRED_LANG = 'P008'
BAD_LANGUAGE_TAG = 'P009'
UNKNOWN_ACTION = 'P010'
BAD_INDENT = 'P011'
EMPTY_AGENT_LIST = 'P012'
BAD_SEPARATOR = 'P013'
DUPLICATE_AGENT = 'P014'
MIXED_WILDCARD = 'P015'
EMPTY_USER_AGENT = 'P016'
EMPTY_PATH = 'P017'
EMPTY_ACTION_LIST = 'P018'
DUPLICATE_ACTION = 'P019'
MISPLACED_LINE = 'P020'
MISSING_VALUE = 'P022'
ILLEGAL_CHARACTER = 'P023'

KEYWORD_DEPTH = {
    'User-agent': 0,
    'Path': 1,
    'Element': 2,
    'Disallow': 3,
    'Guide': 3,
    'Lang': 4,
    'Guideline': 4,
}

_KEYWORD_RE = re.compile(r'(User-agent|Path|Element|Disallow|Guide|Lang|Guideline):')
_TOKEN_RE = re.compile(r'[^ ]+')
_PATH_CHAR_RE = re.compile(r'[a-zA-Z0-9_.&%/~:@-]')

_UNIT_LABELS = {
    IndentUnit.TWO_SPACES: 'two spaces',
    IndentUnit.FOUR_SPACES: 'four spaces',
    IndentUnit.TAB: 'one tab',
}


@dataclass(frozen=True)
class ParseResult:
    """
    Outcome of parsing one document.

    `policy` is present only when no Error-severity diagnostic was produced.
    `comments` holds the spans of the comment lines that were skipped.
    """
    policy: PolicyFile | None
    diagnostics: tuple[Diagnostic, ...] = ()
    comments: tuple[SourceSpan, ...] = ()

    @property
    def ok(self) -> bool:
        return self.policy is not None

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)


@dataclass
class _DisallowDraft:
    actions: ActionList | None
    span: SourceSpan


@dataclass
class _GuideDraft:
    actions: ActionList | None
    span: SourceSpan
    pairs: list = field(default_factory=list)
    pending: tuple | None = None


@dataclass
class _ElementDraft:
    name: str
    span: SourceSpan
    rules: list = field(default_factory=list)
    attached: bool = True


@dataclass
class _PathDraft:
    path: str | None
    file_type: FileType | None
    span: SourceSpan
    elements: list = field(default_factory=list)
    attached: bool = True


@dataclass
class _AgentDraft:
    agents: AgentSelector | None
    span: SourceSpan
    paths: list = field(default_factory=list)


class _Parser:

    def __init__(self, text: str, source_name: str, mode: Mode):
        self.text = text
        self.source_name = source_name
        self.mode = mode
        self.diag = DiagnosticCollector()
        self.unit: IndentUnit | None = None
        self.comments: list[SourceSpan] = []
        self.blocks: list[_AgentDraft] = []
        self.agent: _AgentDraft | None = None
        self.path: _PathDraft | None = None
        self.element: _ElementDraft | None = None
        self.guide: _GuideDraft | None = None
        self.lineno = 0

    @property
    def strict(self) -> bool:
        return self.mode is Mode.STRICT

    def run(self) -> ParseResult:
        text = self.text.removeprefix('\ufeff')
        lines = text.replace('\r\n', '\n').split('\n')
        if lines[-1] == '':
            lines.pop()
        for self.lineno, line in enumerate(lines, start=1):
            self._line(line)
        self._close_agent()

        policy = None
        if not self.diag.has_errors():
            policy = PolicyFile(
                blocks=tuple(self._build_agent(a) for a in self.blocks),
                indent_unit=self.unit or IndentUnit.TWO_SPACES,
                source_name=self.source_name,
            )
        logger.debug(
            'parsed %s: %d block(s), %d diagnostic(s)',
            self.source_name, len(self.blocks), len(self.diag.diagnostics),
        )
        return ParseResult(policy, self.diag.diagnostics, tuple(self.comments))

    def _span(self, column: int, length: int = 0) -> SourceSpan:
        return SourceSpan(self.lineno, column, length)

    # Line dispatch

    def _line(self, line: str) -> None:
        content = line.lstrip(' \t')
        if not content:
            return
        indent = line[:len(line) - len(content)]
        column = len(indent) + 1
        if content.startswith('#'):
            self.comments.append(self._span(column, len(content)))
            return
        bad = FORBIDDEN_CHAR_RE.search(content)
        if bad:
            if bad.group() == '\r':
                message = 'a carriage return is only allowed as part of a CRLF line ending'
            else:
                message = f'character {bad.group()!r} cannot be represented in the XML form'
            self.diag.error(ILLEGAL_CHARACTER, message, self._span(column + bad.start(), 1))
            return

        depth = self._depth(indent)
        match = _KEYWORD_RE.match(content)
        if match is None:
            self.diag.error(
                UNKNOWN_KEYWORD,
                'unrecognized line; expected one of User-agent:, Path:, Element:, '
                'Disallow:, Guide:, Lang:, Guideline: or a # comment',
                self._span(column, len(content)),
            )
            return

        keyword = match.group(1)
        span = self._span(column, len(content))
        expected = KEYWORD_DEPTH[keyword]
        if depth is not None and depth != expected:
            self.diag.error(
                BAD_DEPTH,
                f"'{keyword}:' must be indented {expected} level(s), found {depth}",
                self._span(1, len(indent)),
            )

        value, value_column = self._value(keyword, content[match.end():], column + match.end())
        handler = {
            'User-agent': self._user_agent,
            'Path': self._path,
            'Element': self._element,
            'Disallow': self._disallow,
            'Guide': self._guide,
            'Lang': self._lang,
            'Guideline': self._guideline,
        }[keyword]
        handler(value, value_column, span)

    def _depth(self, indent: str) -> int | None:
        if not indent:
            return 0
        if self.unit is None:
            unit = IndentUnit.from_whitespace(indent)
            if unit is None and set(indent) == {'\t'}:
                unit = IndentUnit.TAB
            if unit is None:
                self.diag.error(
                    BAD_INDENT,
                    f'cannot use {indent!r} as the indentation unit; '
                    'indent with two spaces, four spaces or one tab',
                    self._span(1, len(indent)),
                )
                return None
            self.unit = unit
        step = self.unit.value
        depth, remainder = divmod(len(indent), len(step))
        if remainder or indent != step * depth:
            self.diag.error(
                BAD_INDENT,
                f'indentation must be whole multiples of {_UNIT_LABELS[self.unit]}, '
                'the unit this document started with',
                self._span(1, len(indent)),
            )
            return None
        return depth

    def _value(self, keyword: str, rest: str, column: int) -> tuple[str, int]:
        # column is where `rest` starts, i.e. right after the colon
        if not rest.strip(' \t'):
            return '', column
        if rest[0] != ' ' or rest[1:2] in (' ', '\t'):
            self.diag.error(
                BAD_SEPARATOR,
                f"'{keyword}:' must be followed by exactly one space",
                self._span(column, 1),
            )
            value = rest.lstrip(' \t')
            return value, column + len(rest) - len(value)
        return rest[1:], column + 1

    def _tokens(self, value: str, column: int) -> list[tuple[str, int]]:
        return [(m.group(), column + m.start()) for m in _TOKEN_RE.finditer(value)]

    def _misplaced(self, keyword: str, parent: str, span: SourceSpan) -> None:
        self.diag.error(MISPLACED_LINE, f"'{keyword}:' line must be inside {parent}", span)

    # Keyword handlers

    def _user_agent(self, value: str, column: int, span: SourceSpan) -> None:
        self._close_agent()
        tokens = self._tokens(value, column)
        agents = None
        if not tokens:
            self.diag.error(EMPTY_AGENT_LIST, "'User-agent:' lists no agents", span)
        elif any(tok == WILDCARD for tok, _ in tokens):
            if len(tokens) > 1:
                self.diag.error(
                    MIXED_WILDCARD, "wildcard '*' cannot be combined with agent names", span,
                )
            else:
                agents = AgentSelector.all()
        else:
            names: list[str] = []
            valid = True
            for tok, col in tokens:
                if not AGENT_NAME_RE.fullmatch(tok):
                    valid = False
                    bad = next(i for i, ch in enumerate(tok) if not AGENT_NAME_RE.fullmatch(ch))
                    self.diag.error(
                        BAD_AGENT_NAME,
                        f'invalid agent name {tok!r}; use only letters, digits and underscores',
                        self._span(col + bad, len(tok) - bad),
                    )
                elif tok in names:
                    self.diag.warning(
                        DUPLICATE_AGENT, f'agent {tok!r} is listed more than once', self._span(col, len(tok)),
                    )
                else:
                    names.append(tok)
            if valid:
                agents = AgentSelector(tuple(names))
        self.agent = _AgentDraft(agents, span)
        self.blocks.append(self.agent)

    def _path(self, value: str, column: int, span: SourceSpan) -> None:
        self._close_path()
        tokens = self._tokens(value, column)
        path = file_type = None
        if not tokens:
            self.diag.error(MISSING_VALUE, "'Path:' needs a path and a file type", span)
        else:
            path_token, path_column = tokens[0]
            path = self._check_path(path_token, path_column)
            if len(tokens) == 1:
                self.diag.error(
                    BAD_FILE_TYPE,
                    'missing file type after the path; expected html, json or xml',
                    self._span(span.column + span.length, 0),
                )
            elif len(tokens) > 2:
                extra, extra_column = tokens[2]
                self.diag.error(
                    BAD_FILE_TYPE, f'unexpected {extra!r} after the file type', self._span(extra_column, len(extra)),
                )
            else:
                kind, kind_column = tokens[1]
                try:
                    file_type = FileType(kind)
                except ValueError:
                    self.diag.error(
                        BAD_FILE_TYPE,
                        f'unknown file type {kind!r}; expected html, json or xml',
                        self._span(kind_column, len(kind)),
                    )

        self.path = _PathDraft(path, file_type, span)
        if self.agent is None:
            self._misplaced('Path', 'a User-agent block', span)
            self.path.attached = False
        else:
            self.agent.paths.append(self.path)

    def _check_path(self, token: str, column: int) -> str | None:
        if not token.startswith('/'):
            self.diag.error(BAD_PATH, f"path {token!r} must begin with '/'", self._span(column, len(token)))
            return None
        if not PATH_RE.fullmatch(token):
            bad = next(i for i, ch in enumerate(token) if not _PATH_CHAR_RE.fullmatch(ch))
            self.diag.error(
                BAD_PATH,
                f'path contains {token[bad]!r}; allowed characters are letters, digits and _.&%/~:@-',
                self._span(column + bad, 1),
            )
            return None
        return token

    def _element(self, value: str, column: int, span: SourceSpan) -> None:
        self._close_element()
        name = value.strip()
        if not name:
            self.diag.error(MISSING_VALUE, "'Element:' needs an element name", span)
        self.element = _ElementDraft(name, span)
        if self.path is None:
            self._misplaced('Element', 'a Path block', span)
            self.element.attached = False
        else:
            self.path.elements.append(self.element)

    def _disallow(self, value: str, column: int, span: SourceSpan) -> None:
        self._close_guide()
        rule = _DisallowDraft(self._actions('Disallow', value, column, span), span)
        self._attach_rule('Disallow', rule, span)

    def _guide(self, value: str, column: int, span: SourceSpan) -> None:
        self._close_guide()
        self.guide = _GuideDraft(self._actions('Guide', value, column, span), span)
        self._attach_rule('Guide', self.guide, span)

    def _attach_rule(self, keyword: str, rule, span: SourceSpan) -> None:
        if self.element is None:
            self._misplaced(keyword, 'an Element block', span)
        else:
            self.element.rules.append(rule)

    def _actions(self, keyword: str, value: str, column: int, span: SourceSpan) -> ActionList | None:
        tokens = self._tokens(value, column)
        if not tokens:
            self.diag.error(EMPTY_ACTION_LIST, f"'{keyword}:' lists no actions", span)
            return None
        if any(tok == WILDCARD for tok, _ in tokens):
            if len(tokens) > 1:
                self.diag.error(MIXED_WILDCARD, "wildcard '*' cannot be combined with action names", span)
                return None
            return ActionList.all()

        actions = []
        valid = True
        for tok, col in tokens:
            token_span = self._span(col, len(tok))
            try:
                action = action_from_string(tok)
            except UnknownAction:
                if self.strict:
                    valid = False
                    self.diag.error(UNKNOWN_ACTION, f'unknown action {tok!r}', token_span)
                    continue
                self.diag.warning(UNKNOWN_ACTION, f'unknown action {tok!r} kept as an extension action', token_span)
                action = ExtensionAction(tok)
            if action in actions:
                self.diag.warning(DUPLICATE_ACTION, f'action {tok!r} is listed more than once', token_span)
                continue
            actions.append(action)
        if not valid:
            return None
        return ActionList(tuple(actions))

    def _lang(self, value: str, column: int, span: SourceSpan) -> None:
        if self.guide is None:
            self._misplaced('Lang', 'a Guide block', span)
            return
        self._flush_pending_lang()
        raw = value.strip()
        tag = None
        if not raw:
            self.diag.error(MISSING_VALUE, "'Lang:' needs a language tag", span)
        elif any(ch.isspace() for ch in raw):
            self.diag.error(BAD_LANGUAGE_TAG, f'language tag {raw!r} must be a single token', span)
        else:
            tag = LanguageTag(raw)
            if not tag.is_well_formed:
                self.diag.report(
                    BAD_LANGUAGE_TAG,
                    f'language tag {raw!r} should look like en or en-US',
                    self._span(column, len(raw)),
                    as_error=self.strict,
                )
        self.guide.pending = (tag, span)

    def _guideline(self, text: str, column: int, span: SourceSpan) -> None:
        if self.guide is None:
            self._misplaced('Guideline', 'a Guide block', span)
            return
        if self.guide.pending is None:
            self.diag.error(UNPAIRED_LANG, "'Guideline:' line has no preceding 'Lang:' line", span)
            return
        tag, _ = self.guide.pending
        self.guide.pending = None
        if not text.strip():
            self.diag.error(MISSING_VALUE, "'Guideline:' needs guideline text", span)
        elif tag is not None:
            self.guide.pairs.append(Guideline(tag, text))

    # Block closing

    def _flush_pending_lang(self) -> None:
        if self.guide is not None and self.guide.pending is not None:
            _, lang_span = self.guide.pending
            self.diag.error(UNPAIRED_LANG, "'Lang:' line is not followed by a 'Guideline:' line", lang_span)
            self.guide.pending = None

    def _close_guide(self) -> None:
        if self.guide is None:
            return
        had_pending = self.guide.pending is not None
        self._flush_pending_lang()
        if not self.guide.pairs and not had_pending:
            self.diag.error(EMPTY_GUIDE, "'Guide:' block has no Lang/Guideline pairs", self.guide.span)
        self.guide = None

    def _close_element(self) -> None:
        self._close_guide()
        if self.element is not None and self.element.attached and not self.element.rules:
            self.diag.error(
                EMPTY_ELEMENT, f'element {self.element.name!r} has no Disallow or Guide lines', self.element.span,
            )
        self.element = None

    def _close_path(self) -> None:
        self._close_element()
        if self.path is not None and self.path.attached and not self.path.elements:
            self.diag.error(EMPTY_PATH, "'Path:' block has no Element blocks", self.path.span)
        self.path = None

    def _close_agent(self) -> None:
        self._close_path()
        if self.agent is not None and not self.agent.paths:
            self.diag.error(EMPTY_USER_AGENT, "'User-agent:' block has no Path blocks", self.agent.span)
        self.agent = None

    # Building the immutable tree (only reached without errors)

    def _build_agent(self, draft: _AgentDraft) -> UserAgentBlock:
        return UserAgentBlock(draft.agents, tuple(self._build_path(p) for p in draft.paths), draft.span)

    def _build_path(self, draft: _PathDraft) -> PathBlock:
        return PathBlock(draft.path, draft.file_type, tuple(self._build_element(e) for e in draft.elements), draft.span)

    def _build_element(self, draft: _ElementDraft) -> ElementBlock:
        rules = []
        for rule in draft.rules:
            if isinstance(rule, _GuideDraft):
                rules.append(GuideRule(rule.actions, tuple(rule.pairs), rule.span))
            else:
                rules.append(DisallowRule(rule.actions, rule.span))
        return ElementBlock(draft.name, tuple(rules), draft.span)


def parse(text: str, source_name: str = '<input>', mode: Mode = Mode.STRICT) -> ParseResult:
    """Parse ai.txt source text into a ParseResult."""
    return _Parser(text, source_name, Mode(mode)).run()


def pretty_print(policy: PolicyFile) -> str:
    """
    Render a policy in canonical form: two-space indentation, one space after
    every keyword colon, actions in stored order, no comments, and a newline
    after every line.
    """
    unit = IndentUnit.TWO_SPACES.value
    lines = []
    for block in policy.blocks:
        lines.append(f'User-agent: {block.agents}')
        for path in block.paths:
            lines.append(f'{unit}Path: {path.path} {path.file_type.value}')
            for element in path.elements:
                lines.append(f'{unit * 2}Element: {element.name}')
                for rule in element.rules:
                    if isinstance(rule, GuideRule):
                        lines.append(f'{unit * 3}Guide: {rule.actions}')
                        for guideline in rule.guidelines:
                            lines.append(f'{unit * 4}Lang: {guideline.language}')
                            lines.append(f'{unit * 4}Guideline: {guideline.text}')
                    else:
                        lines.append(f'{unit * 3}Disallow: {rule.actions}')
    return ''.join(line + '\n' for line in lines)
