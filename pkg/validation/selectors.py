"""
Syntax check for the CSS selector subset accepted in html element names.

Supported: type selectors, `*`, `.class`, `#id`, `[attr]`, `[attr=value]`
(value unquoted or quoted), the descendant combinator (whitespace) and the
child combinator `>`. Anything else, such as pseudo-classes, `+`, `~` or
selector lists, is rejected.
"""
from __future__ import annotations

import re

_IDENT_RE = re.compile(r'-?[_a-zA-Z\u00a0-\U0010ffff][_a-zA-Z0-9\u00a0-\U0010ffff-]*')
_WHITESPACE = ' \t\f'


class SelectorError(ValueError):
    """Raised when a selector falls outside the supported subset."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f'{message} at position {position}')


class _SelectorReader:

    __slots__ = ('selector', 'pos')

    def __init__(self, selector: str):
        self.selector = selector
        self.pos = 0

    def _peek(self) -> str:
        return self.selector[self.pos] if self.pos < len(self.selector) else ''

    def _skip_whitespace(self) -> bool:
        start = self.pos
        while self._peek() and self._peek() in _WHITESPACE:
            self.pos += 1
        return self.pos > start

    def _ident(self, what: str) -> str:
        match = _IDENT_RE.match(self.selector, self.pos)
        if match is None:
            raise SelectorError(f'expected {what}', self.pos)
        self.pos = match.end()
        return match.group()

    def _string(self, quote: str) -> None:
        self.pos += 1
        while self.pos < len(self.selector):
            ch = self.selector[self.pos]
            if ch == '\\':
                self.pos += 2
                continue
            self.pos += 1
            if ch == quote:
                return
        raise SelectorError('unterminated string', self.pos)

    def _attribute(self) -> None:
        self.pos += 1  # [
        self._skip_whitespace()
        self._ident('attribute name')
        self._skip_whitespace()
        ch = self._peek()
        if ch == '=':
            self.pos += 1
            self._skip_whitespace()
            if self._peek() in ('"', "'"):
                self._string(self._peek())
            else:
                self._ident('attribute value')
            self._skip_whitespace()
            ch = self._peek()
        if ch != ']':
            raise SelectorError("expected ']'", self.pos)
        self.pos += 1

    def _compound(self) -> None:
        start = self.pos
        ch = self._peek()
        if ch == '*':
            self.pos += 1
        elif ch and _IDENT_RE.match(self.selector, self.pos):
            self._ident('element name')
        while True:
            ch = self._peek()
            if ch == '.':
                self.pos += 1
                self._ident('class name')
            elif ch == '#':
                self.pos += 1
                self._ident('id')
            elif ch == '[':
                self._attribute()
            else:
                break
        if self.pos == start:
            if ch:
                raise SelectorError(f'unsupported selector syntax {ch!r}', self.pos)
            raise SelectorError('expected a selector', self.pos)

    def read(self) -> None:
        self._skip_whitespace()
        self._compound()
        while self.pos < len(self.selector):
            had_space = self._skip_whitespace()
            if not self._peek():
                break
            if self._peek() == '>':
                self.pos += 1
                self._skip_whitespace()
            elif not had_space:
                raise SelectorError(f'unsupported selector syntax {self._peek()!r}', self.pos)
            self._compound()


def check_selector(selector: str) -> None:
    """Raise SelectorError unless `selector` is in the supported subset."""
    _SelectorReader(selector).read()


def is_supported_selector(selector: str) -> bool:
    try:
        check_selector(selector)
    except SelectorError:
        return False
    return True
