"""
XML compilation of ai.txt policies.

The schema is fixed (root `ai-txt`, attribute `version="1.0"`) and every
distinction the text form makes survives a compile/decode round trip:

    <ai-txt version="1.0">
      <user-agent>
        <agent name="GPTBot"/>
        <path value="/index.html" file-type="html">
          <element name="p">
            <disallow>
              <action name="Train"/>
            </disallow>
            <guide>
              <all-actions/>
              <guideline lang="en-US">Cite the page.</guideline>
            </guide>
          </element>
        </path>
      </user-agent>
    </ai-txt>

Decoding goes through defusedxml so that documents received from elsewhere
cannot expand entities or reach external resources.
"""
from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from defusedxml import ElementTree as SafeET
from defusedxml.common import DefusedXmlException

from common.exceptions import InvalidPolicy, SchemaViolation, UnknownAction
from language.models import (
    ActionList,
    AgentSelector,
    DisallowRule,
    ElementBlock,
    ExtensionAction,
    FileType,
    Guideline,
    GuideRule,
    LanguageTag,
    Mode,
    PathBlock,
    PolicyFile,
    UserAgentBlock,
    action_from_string,
)
from validation.validator import validate

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1.0'
XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'


@dataclass(frozen=True)
class XmlDocument:
    text: str

    def __str__(self):
        return self.text


# Compilation

def _action_children(parent: ET.Element, actions: ActionList) -> None:
    if actions.is_all:
        ET.SubElement(parent, 'all-actions')
        return
    for action in actions.actions:
        ET.SubElement(parent, 'action', name=str(action))


def _policy_tree(policy: PolicyFile) -> ET.Element:
    root = ET.Element('ai-txt', version=SCHEMA_VERSION)
    for block in policy.blocks:
        ua = ET.SubElement(root, 'user-agent')
        if block.agents.is_all:
            ET.SubElement(ua, 'all-agents')
        for name in block.agents.names:
            ET.SubElement(ua, 'agent', name=name)
        for path in block.paths:
            path_el = ET.SubElement(ua, 'path', {'value': path.path, 'file-type': path.file_type.value})
            for element in path.elements:
                element_el = ET.SubElement(path_el, 'element', name=element.name)
                for rule in element.rules:
                    if isinstance(rule, GuideRule):
                        guide_el = ET.SubElement(element_el, 'guide')
                        _action_children(guide_el, rule.actions)
                        for guideline in rule.guidelines:
                            text_el = ET.SubElement(guide_el, 'guideline', lang=guideline.language.raw)
                            text_el.text = guideline.text
                    else:
                        _action_children(ET.SubElement(element_el, 'disallow'), rule.actions)
    return root


def compile_xml(policy: PolicyFile, mode: Mode = Mode.STRICT) -> XmlDocument:
    """
    Serialize a validated policy. Raises InvalidPolicy when validation
    reports any Error-severity diagnostic.
    """
    report = validate(policy, mode)
    if not report.is_clean:
        logger.warning('refusing to compile %s: validation reported errors', policy.source_name)
        raise InvalidPolicy([d for d in report.diagnostics if d.is_error], 'refusing to compile policy')

    root = _policy_tree(policy)
    ET.indent(root, space='  ')
    # ElementTree writes empty tags as `<x />`; the schema's canonical form is `<x/>`.
    # Text and attribute values have '>' escaped, so only tag ends can match.
    body = ET.tostring(root, encoding='unicode').replace(' />', '/>')
    logger.debug('compiled %s into %d characters of XML', policy.source_name, len(body))
    return XmlDocument(XML_DECLARATION + body + '\n')


# Decoding

class _Decoder:

    def __init__(self, mode: Mode):
        self.strict = Mode(mode) is Mode.STRICT

    @staticmethod
    def _fail(location: str, message: str):
        raise SchemaViolation(location, message)

    def _children(self, node: ET.Element, location: str):
        """Yield (child, child_location), numbering children per tag like XPath."""
        if node.text and node.text.strip():
            self._fail(location, f'unexpected text {node.text.strip()!r}')
        counts: dict[str, int] = {}
        for child in node:
            if not isinstance(child.tag, str):
                continue
            if child.tail and child.tail.strip():
                self._fail(location, f'unexpected text {child.tail.strip()!r}')
            counts[child.tag] = counts.get(child.tag, 0) + 1
            yield child, f'{location}/{child.tag}[{counts[child.tag]}]'

    def _attr(self, node: ET.Element, name: str, location: str) -> str:
        value = node.get(name)
        if value is None:
            self._fail(location, f'<{node.tag}> is missing the {name!r} attribute')
        return value

    def _build(self, location: str, factory, *args):
        try:
            return factory(*args)
        except ValueError as exc:
            self._fail(location, str(exc))

    def policy(self, root: ET.Element) -> PolicyFile:
        location = f'/{root.tag}'
        if root.tag != 'ai-txt':
            self._fail(location, f"root element must be <ai-txt>, found <{root.tag}>")
        version = root.get('version')
        if version != SCHEMA_VERSION:
            self._fail(location, f'unsupported schema version {version!r}; expected {SCHEMA_VERSION!r}')
        blocks = []
        for child, where in self._children(root, location):
            if child.tag != 'user-agent':
                self._fail(where, f'unexpected <{child.tag}> inside <ai-txt>')
            blocks.append(self.user_agent(child, where))
        return PolicyFile(tuple(blocks), source_name='<xml>')

    def user_agent(self, node: ET.Element, location: str) -> UserAgentBlock:
        names, all_agents, paths = [], False, []
        for child, where in self._children(node, location):
            if child.tag == 'all-agents':
                all_agents = True
            elif child.tag == 'agent':
                names.append(self._attr(child, 'name', where))
            elif child.tag == 'path':
                paths.append(self.path(child, where))
            else:
                self._fail(where, f'unexpected <{child.tag}> inside <user-agent>')
        if all_agents and names:
            self._fail(location, '<all-agents> cannot be combined with <agent> entries')
        selector = self._build(location, AgentSelector, tuple(names), all_agents)
        return self._build(location, UserAgentBlock, selector, tuple(paths))

    def path(self, node: ET.Element, location: str) -> PathBlock:
        value = self._attr(node, 'value', location)
        kind = self._attr(node, 'file-type', location)
        try:
            file_type = FileType(kind)
        except ValueError:
            self._fail(location, f'unknown file type {kind!r}')
        elements = []
        for child, where in self._children(node, location):
            if child.tag != 'element':
                self._fail(where, f'unexpected <{child.tag}> inside <path>')
            elements.append(self.element(child, where))
        return self._build(location, PathBlock, value, file_type, tuple(elements))

    def element(self, node: ET.Element, location: str) -> ElementBlock:
        name = self._attr(node, 'name', location)
        rules = []
        for child, where in self._children(node, location):
            if child.tag == 'disallow':
                rules.append(self._build(where, DisallowRule, self.actions(child, where, ())))
            elif child.tag == 'guide':
                rules.append(self.guide(child, where))
            else:
                self._fail(where, f'unexpected <{child.tag}> inside <element>')
        return self._build(location, ElementBlock, name, tuple(rules))

    def guide(self, node: ET.Element, location: str) -> GuideRule:
        guidelines = []
        for child, where in self._children(node, location):
            if child.tag != 'guideline':
                continue
            if len(child):
                self._fail(where, '<guideline> must contain text only')
            lang = self._attr(child, 'lang', where)
            tag = self._build(where, LanguageTag, lang)
            guidelines.append(self._build(where, Guideline, tag, child.text or ''))
        actions = self.actions(node, location, ('guideline',))
        return self._build(location, GuideRule, actions, tuple(guidelines))

    def actions(self, node: ET.Element, location: str, others: tuple[str, ...]) -> ActionList:
        members, wildcard = [], False
        for child, where in self._children(node, location):
            if child.tag == 'all-actions':
                wildcard = True
            elif child.tag == 'action':
                members.append(self.action(self._attr(child, 'name', where), where))
            elif child.tag not in others:
                self._fail(where, f'unexpected <{child.tag}> inside <{node.tag}>')
        if wildcard and members:
            self._fail(location, '<all-actions> cannot be combined with <action> entries')
        return self._build(location, ActionList, tuple(members), wildcard)

    def action(self, name: str, location: str):
        try:
            return action_from_string(name)
        except UnknownAction:
            if self.strict:
                self._fail(location, f'unknown action {name!r}')
            return self._build(location, ExtensionAction, name)


def decode_xml(doc: XmlDocument | str, mode: Mode = Mode.STRICT) -> PolicyFile:
    """Read a document in the canonical schema back into a PolicyFile."""
    text = doc.text if isinstance(doc, XmlDocument) else doc
    try:
        root = SafeET.fromstring(text.encode('utf-8'))
    except (ET.ParseError, DefusedXmlException) as exc:
        raise SchemaViolation('/', f'not well-formed XML: {exc}') from exc
    return _Decoder(mode).policy(root)
