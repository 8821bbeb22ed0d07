"""
Domain model for ai.txt documents.

Every production of the ai.txt grammar that carries meaning has a value
object here. All of them are frozen dataclasses; source spans, the indent
unit and the source name are excluded from equality so two documents that
say the same thing compare equal no matter how they were written.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from common.exceptions import UnknownAction

WILDCARD = '*'

AGENT_NAME_RE = re.compile(r'[a-zA-Z0-9_]+')
PATH_RE = re.compile(r'/[a-zA-Z0-9_.&%/~:@-]*')
LANGUAGE_TAG_RE = re.compile(r'([a-zA-Z]{2,3})(?:-([a-zA-Z]{2}))?')
# Characters the XML form cannot carry. A lone carriage return is included
# because XML parsers fold it into a newline.
FORBIDDEN_CHAR_RE = re.compile(r'[\x00-\x08\x0b-\x1f\ufffe\uffff\ud800-\udfff]')


def check_text(value: str, what: str) -> None:
    """Raise ValueError if `value` holds a character the XML form cannot carry."""
    match = FORBIDDEN_CHAR_RE.search(value)
    if match:
        raise ValueError(f'{what} contains {match.group()!r}, which cannot be represented')


@dataclass(frozen=True)
class SourceSpan:
    """A 1-based line/column position plus a length in characters."""
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f'invalid source span {self.line}:{self.column}+{self.length}')

    def __str__(self):
        return f'{self.line}:{self.column}'


class ActionName(str, Enum):
    ANALYZE = 'Analyze'
    CITE = 'Cite'
    CLIP = 'Clip'
    DESCRIBE = 'Describe'
    EVALUATE = 'Evaluate'
    EXTRACT = 'Extract'
    INDEX = 'Index'
    MANIPULATE = 'Manipulate'
    REPHRASE = 'Rephrase'
    RETURN = 'Return'
    SUMMARIZE = 'Summarize'
    TRAIN = 'Train'
    TRANSCRIBE = 'Transcribe'
    TRANSLATE = 'Translate'

    def __str__(self):
        return self.value


_ACTION_DESCRIPTIONS = {
    ActionName.ANALYZE: 'reason over the content to draw insights or conclusions beyond a plain description',
    ActionName.CITE: 'attribute the content to its original source',
    ActionName.CLIP: 'cut audio or video content into shorter segments',
    ActionName.DESCRIBE: 'give a literal, surface-level account of what the content shows or says',
    ActionName.EVALUATE: 'judge quality, sentiment, bias, toxicity or similar properties of the content',
    ActionName.EXTRACT: 'pull structured data or metadata out of the content',
    ActionName.INDEX: 'store the content or embeddings of it in a searchable index',
    ActionName.MANIPULATE: 'edit or alter media content, including cropping, filters and remixes',
    ActionName.REPHRASE: 'restate text in different words',
    ActionName.RETURN: 'reproduce the original content in generated output',
    ActionName.SUMMARIZE: 'condense the content into its main points or themes',
    ActionName.TRAIN: 'add the content to a dataset used for model training',
    ActionName.TRANSCRIBE: 'turn spoken audio or video into written text',
    ActionName.TRANSLATE: 'convert text from one natural language into another',
}


@dataclass(frozen=True)
class ExtensionAction:
    """
    An action token outside the curated vocabulary, kept verbatim when a
    document is read in lenient mode.
    """
    name: str

    def __post_init__(self):
        if not self.name or self.name == WILDCARD or ' ' in self.name or '\n' in self.name:
            raise ValueError(f'invalid extension action {self.name!r}')
        if any(self.name == action.value for action in ActionName):
            raise ValueError(f'{self.name!r} is a curated action, not an extension')
        check_text(self.name, 'extension action')

    def __str__(self):
        return self.name


Action = Union[ActionName, ExtensionAction]


def action_from_string(token: str) -> ActionName:
    """Exact, case-sensitive lookup of a curated action name."""
    try:
        return ActionName(token)
    except ValueError:
        raise UnknownAction(token) from None


def vocabulary() -> list[ActionName]:
    return list(ActionName)


def describe_action(action: Action) -> str | None:
    return _ACTION_DESCRIPTIONS.get(action)


class Mode(str, Enum):
    STRICT = 'strict'
    LENIENT = 'lenient'


class IndentUnit(Enum):
    TWO_SPACES = '  '
    FOUR_SPACES = '    '
    TAB = '\t'

    @classmethod
    def from_whitespace(cls, whitespace: str) -> IndentUnit | None:
        for unit in cls:
            if unit.value == whitespace:
                return unit
        return None


class FileType(str, Enum):
    HTML = 'html'
    JSON = 'json'
    XML = 'xml'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ActionList:
    """Either the wildcard (`is_all`) or a non-empty ordered set of actions."""
    actions: tuple[Action, ...] = ()
    is_all: bool = False

    def __post_init__(self):
        if self.is_all and self.actions:
            raise ValueError('a wildcard action list carries no members')
        if not self.is_all and not self.actions:
            raise ValueError('an action list needs at least one action')
        if len(set(self.actions)) != len(self.actions):
            raise ValueError('duplicate action in action list')

    @classmethod
    def all(cls) -> ActionList:
        return cls(is_all=True)

    @classmethod
    def of(cls, *actions: Action) -> ActionList:
        return cls(actions=tuple(actions))

    def covers(self, action: Action) -> bool:
        return self.is_all or action in self.actions

    def extensions(self) -> tuple[ExtensionAction, ...]:
        return tuple(a for a in self.actions if isinstance(a, ExtensionAction))

    def __str__(self):
        if self.is_all:
            return WILDCARD
        return ' '.join(str(a) for a in self.actions)


@dataclass(frozen=True)
class AgentSelector:
    """Either every agent (`is_all`) or a non-empty ordered set of agent names."""
    names: tuple[str, ...] = ()
    is_all: bool = False

    def __post_init__(self):
        if self.is_all and self.names:
            raise ValueError('a wildcard agent selector carries no names')
        if not self.is_all and not self.names:
            raise ValueError('an agent selector needs at least one name')
        for name in self.names:
            if not AGENT_NAME_RE.fullmatch(name):
                raise ValueError(f'invalid agent name {name!r}')
        if len(set(self.names)) != len(self.names):
            raise ValueError('duplicate agent name in selector')

    @classmethod
    def all(cls) -> AgentSelector:
        return cls(is_all=True)

    @classmethod
    def of(cls, *names: str) -> AgentSelector:
        return cls(names=tuple(names))

    def names_exactly(self, agent: str) -> bool:
        return not self.is_all and agent in self.names

    def __str__(self):
        if self.is_all:
            return WILDCARD
        return ' '.join(self.names)


@dataclass(frozen=True)
class LanguageTag:
    """
    A guideline language such as `en-US`.

    Only the raw text is stored. Shape validity is reported by the parser and
    the validator rather than enforced here, so a lenient document with a
    malformed tag can still be loaded and linted.
    """
    raw: str

    def __post_init__(self):
        if not self.raw or any(ch.isspace() for ch in self.raw):
            raise ValueError(f'invalid language tag {self.raw!r}')
        check_text(self.raw, 'language tag')

    @property
    def is_well_formed(self) -> bool:
        return LANGUAGE_TAG_RE.fullmatch(self.raw) is not None

    @property
    def primary(self) -> str | None:
        match = LANGUAGE_TAG_RE.fullmatch(self.raw)
        return match.group(1) if match else None

    @property
    def region(self) -> str | None:
        match = LANGUAGE_TAG_RE.fullmatch(self.raw)
        return match.group(2) if match else None

    def __str__(self):
        return self.raw


@dataclass(frozen=True)
class Guideline:
    language: LanguageTag
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError('guideline text is empty')
        if self.text[0] in ' \t':
            raise ValueError('guideline text must not start with a space or tab')
        if '\n' in self.text:
            raise ValueError('guideline text must be a single line')
        check_text(self.text, 'guideline text')


@dataclass(frozen=True)
class DisallowRule:
    actions: ActionList
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class GuideRule:
    actions: ActionList
    guidelines: tuple[Guideline, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.guidelines:
            raise ValueError('a guide rule needs at least one guideline')


Rule = Union[DisallowRule, GuideRule]


@dataclass(frozen=True)
class ElementBlock:
    name: str
    rules: tuple[Rule, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.name.strip() or '\n' in self.name:
            raise ValueError('element name must be a non-empty single line')
        if self.name != self.name.strip():
            raise ValueError(f'element name {self.name!r} has surrounding whitespace')
        check_text(self.name, 'element name')
        if not self.rules:
            raise ValueError(f'element {self.name!r} has no rules')

    @property
    def is_wildcard(self) -> bool:
        return self.name == WILDCARD


@dataclass(frozen=True)
class PathBlock:
    path: str
    file_type: FileType
    elements: tuple[ElementBlock, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not PATH_RE.fullmatch(self.path):
            raise ValueError(f'invalid path {self.path!r}')
        if not self.elements:
            raise ValueError(f'path {self.path!r} has no element blocks')


@dataclass(frozen=True)
class UserAgentBlock:
    agents: AgentSelector
    paths: tuple[PathBlock, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.paths:
            raise ValueError('a user-agent block needs at least one path block')


@dataclass(frozen=True)
class PolicyFile:
    blocks: tuple[UserAgentBlock, ...] = ()
    indent_unit: IndentUnit = field(default=IndentUnit.TWO_SPACES, compare=False)
    source_name: str = field(default='<memory>', compare=False)

    @property
    def is_empty(self) -> bool:
        return not self.blocks

    def iter_rules(self):
        """Yield (block, path, element, rule) for every rule in source order."""
        for block in self.blocks:
            for path in block.paths:
                for element in path.elements:
                    for rule in element.rules:
                        yield block, path, element, rule
