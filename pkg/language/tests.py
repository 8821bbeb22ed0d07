from django.test import SimpleTestCase
from hypothesis import given, settings
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from common.exceptions import UnknownAction
from common.testing import ARTICLE_POLICY, GUIDE_POLICY, SUMMARY_GUIDELINE, policies, property_settings

from . import parser as codes
from .diagnostics import Severity
from .models import (
    ActionList,
    ActionName,
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
    vocabulary,
)
from .parser import parse, pretty_print

ARTICLE_CANONICAL = ARTICLE_POLICY.split('\n', 1)[1]

ARTICLE_TREE = PolicyFile((
    UserAgentBlock(AgentSelector.all(), (
        PathBlock('/articles/today.html', FileType.HTML, (
            ElementBlock('p', (DisallowRule(ActionList.of(ActionName.TRAIN, ActionName.SUMMARIZE)),)),
            ElementBlock('img', (DisallowRule(ActionList.of(ActionName.MANIPULATE)),)),
        )),
    )),
))


def document(*lines):
    return ''.join(line + '\n' for line in lines)


def rule_doc(*rule_lines):
    """A document with one html path and one element `p` holding the given rule lines."""
    return document('User-agent: *', '  Path: /x.html html', '    Element: p', *rule_lines)


class ActionVocabularyTests(SimpleTestCase):

    def test_known_actions_are_exact_title_case(self):
        self.assertIs(action_from_string('Train'), ActionName.TRAIN)
        self.assertIs(action_from_string('Summarize'), ActionName.SUMMARIZE)

    def test_unknown_or_wrong_case_raises(self):
        for token in ('Crop', 'train', '*', ''):
            with self.subTest(token=token), self.assertRaises(UnknownAction) as ctx:
                action_from_string(token)
            self.assertEqual(ctx.exception.token, token)

    def test_vocabulary_is_alphabetical_and_stable(self):
        names = [str(a) for a in vocabulary()]
        self.assertEqual(len(names), 14)
        self.assertEqual(names[:3], ['Analyze', 'Cite', 'Clip'])
        self.assertEqual(names[-1], 'Translate')
        self.assertEqual(names, sorted(names))
        self.assertEqual(vocabulary(), vocabulary())

    def test_every_member_round_trips_through_its_string(self):
        for member in ActionName:
            self.assertIs(action_from_string(str(member)), member)


class ModelInvariantTests(SimpleTestCase):

    def test_span_rejects_zero_line(self):
        with self.assertRaises(ValueError):
            SourceSpan(0, 1)

    def test_action_list_shapes(self):
        self.assertTrue(ActionList.all().covers(ActionName.INDEX))
        self.assertEqual(str(ActionList.of(ActionName.TRAIN, ActionName.CITE)), 'Train Cite')
        with self.assertRaises(ValueError):
            ActionList()
        with self.assertRaises(ValueError):
            ActionList.of(ActionName.TRAIN, ActionName.TRAIN)
        with self.assertRaises(ValueError):
            ActionList((ActionName.TRAIN,), is_all=True)

    def test_agent_selector_checks_names(self):
        with self.assertRaises(ValueError):
            AgentSelector.of('GPT Bot')
        self.assertTrue(AgentSelector.of('GPTBot').names_exactly('GPTBot'))
        self.assertFalse(AgentSelector.all().names_exactly('GPTBot'))

    def test_language_tag_shape(self):
        self.assertEqual(LanguageTag('en-US').primary, 'en')
        self.assertEqual(LanguageTag('en-US').region, 'US')
        self.assertIsNone(LanguageTag('fra').region)
        self.assertFalse(LanguageTag('english').is_well_formed)
        with self.assertRaises(ValueError):
            LanguageTag('en US')

    def test_guideline_is_single_line(self):
        with self.assertRaises(ValueError):
            Guideline(LanguageTag('en'), 'two\nlines')
        with self.assertRaises(ValueError):
            Guideline(LanguageTag('en'), '   ')

    def test_values_the_xml_form_cannot_carry_are_refused(self):
        en = LanguageTag('en')
        for char in ('\x00', '\x0c', '\x1f', '\r', '\ufffe', '\uffff'):
            with self.subTest(char=char):
                with self.assertRaises(ValueError):
                    Guideline(en, f'Link{char}back.')
                with self.assertRaises(ValueError):
                    ElementBlock(f'p{char}', (DisallowRule(ActionList.all()),))
                with self.assertRaises(ValueError):
                    ExtensionAction(f'Crop{char}')
                with self.assertRaises(ValueError):
                    LanguageTag(f'en{char}')
        self.assertEqual(Guideline(en, 'Link\tback.').text, 'Link\tback.')

    def test_values_that_would_not_reparse_are_refused(self):
        with self.assertRaises(ValueError):
            Guideline(LanguageTag('en'), '  Link back.')
        with self.assertRaises(ValueError):
            Guideline(LanguageTag('en'), '\tLink back.')
        with self.assertRaises(ValueError):
            ElementBlock(' p', (DisallowRule(ActionList.all()),))
        for name in ('', '*', 'Crop it', 'Summarize'):
            with self.subTest(name=name), self.assertRaises(ValueError):
                ExtensionAction(name)
        self.assertEqual(Guideline(LanguageTag('en'), 'Link back.  ').text, 'Link back.  ')

    def test_blocks_need_children(self):
        with self.assertRaises(ValueError):
            ElementBlock('p', ())
        with self.assertRaises(ValueError):
            PathBlock('relative.html', FileType.HTML, (ElementBlock('p', (DisallowRule(ActionList.all()),)),))

    def test_equality_ignores_spans(self):
        a = DisallowRule(ActionList.all(), SourceSpan(3, 7))
        b = DisallowRule(ActionList.all())
        self.assertEqual(a, b)


class ParseTests(SimpleTestCase):

    def test_empty_text_is_an_empty_policy(self):
        result = parse('')
        self.assertTrue(result.ok)
        self.assertTrue(result.policy.is_empty)
        self.assertEqual(result.diagnostics, ())

    def test_comment_only_document(self):
        result = parse('# comment only\n')
        self.assertTrue(result.policy.is_empty)
        self.assertEqual(result.diagnostics, ())
        self.assertEqual(result.comments, (SourceSpan(1, 1, 14),))

    def test_two_rule_document(self):
        result = parse(ARTICLE_POLICY, 'article.aitxt')
        self.assertEqual(result.diagnostics, ())
        self.assertEqual(result.policy, ARTICLE_TREE)
        self.assertEqual(result.policy.source_name, 'article.aitxt')
        self.assertIs(result.policy.indent_unit, IndentUnit.TWO_SPACES)

    def test_spans_point_at_keyword_lines(self):
        block = parse(ARTICLE_POLICY).policy.blocks[0]
        self.assertEqual(block.span.line, 2)
        img = block.paths[0].elements[1]
        self.assertEqual((img.span.line, img.span.column), (6, 5))
        self.assertEqual(img.rules[0].span.line, 7)

    def test_bad_agent_name_is_reported_at_the_offending_column(self):
        result = parse(document('User-agent: GPT Bot!', '  Path: /x html', '    Element: p', '      Disallow: *'))
        self.assertFalse(result.ok)
        [error] = result.errors
        self.assertEqual(error.code, codes.BAD_AGENT_NAME)
        self.assertEqual((error.span.line, error.span.column), (1, 20))

    def test_crlf_and_missing_final_newline(self):
        text = ARTICLE_CANONICAL.replace('\n', '\r\n').rstrip('\r\n')
        self.assertEqual(parse(text).policy, ARTICLE_TREE)

    def test_characters_the_xml_form_cannot_carry_are_reported(self):
        result = parse(rule_doc('      Guide: Cite', '        Lang: en', '        Guideline: Link\x0cback.'))
        self.assertFalse(result.ok)
        error = result.errors[0]
        self.assertEqual(error.code, codes.ILLEGAL_CHARACTER)
        self.assertEqual((error.span.line, error.span.column), (7, 24))

        lenient = parse(document('User-agent: *', '  Path: / html', '    Element: p\x01', '      Disallow: *'), mode=Mode.LENIENT)
        self.assertIn(codes.ILLEGAL_CHARACTER, [d.code for d in lenient.errors])

    def test_lone_carriage_return_is_reported(self):
        result = parse('User-agent: GPTBot\rClaudeBot\n')
        self.assertEqual(result.errors[0].code, codes.ILLEGAL_CHARACTER)
        self.assertEqual(result.errors[0].span.column, 19)
        self.assertEqual(parse(ARTICLE_CANONICAL.replace('\n', '\r\n')).errors, ())

    def test_control_characters_in_comments_are_ignored(self):
        self.assertEqual(parse('# page\x0cbreak\n' + ARTICLE_CANONICAL).policy, ARTICLE_TREE)

    def test_leading_byte_order_mark_is_ignored(self):
        self.assertEqual(parse('\ufeff' + ARTICLE_CANONICAL).policy, ARTICLE_TREE)
        result = parse(document('\ufeffUser-agent: GPT Bot!', '  Path: /x html', '    Element: p', '      Disallow: *'))
        self.assertEqual((result.errors[0].span.line, result.errors[0].span.column), (1, 20))

    def test_tab_and_four_space_indentation(self):
        for unit in (IndentUnit.TAB, IndentUnit.FOUR_SPACES):
            with self.subTest(unit=unit):
                text = ARTICLE_CANONICAL.replace('  ', unit.value)
                result = parse(text)
                self.assertEqual(result.policy, ARTICLE_TREE)
                self.assertIs(result.policy.indent_unit, unit)
                self.assertEqual(pretty_print(result.policy), ARTICLE_CANONICAL)

    def test_guide_rule(self):
        rule = parse(GUIDE_POLICY).policy.blocks[0].paths[0].elements[0].rules[0]
        self.assertEqual(rule, GuideRule(
            ActionList.of(ActionName.SUMMARIZE), (Guideline(LanguageTag('en-US'), SUMMARY_GUIDELINE),),
        ))

    def test_duplicate_agent_is_a_warning_and_deduplicated(self):
        result = parse(document('User-agent: GPTBot GPTBot', '  Path: /x html', '    Element: p', '      Disallow: *'))
        self.assertTrue(result.ok)
        self.assertEqual([d.code for d in result.warnings], [codes.DUPLICATE_AGENT])
        self.assertEqual(result.policy.blocks[0].agents.names, ('GPTBot',))

    def test_duplicate_action_is_a_warning(self):
        result = parse(rule_doc('      Disallow: Train Train'))
        self.assertEqual([d.code for d in result.warnings], [codes.DUPLICATE_ACTION])
        self.assertEqual(result.policy.blocks[0].paths[0].elements[0].rules[0].actions, ActionList.of(ActionName.TRAIN))

    def test_unknown_action_depends_on_mode(self):
        text = rule_doc('      Disallow: Crop')
        strict = parse(text, mode=Mode.STRICT)
        self.assertEqual([d.code for d in strict.errors], [codes.UNKNOWN_ACTION])
        lenient = parse(text, mode=Mode.LENIENT)
        self.assertTrue(lenient.ok)
        self.assertEqual(lenient.diagnostics[0].severity, Severity.WARNING)
        rule = lenient.policy.blocks[0].paths[0].elements[0].rules[0]
        self.assertEqual(rule.actions.actions, (ExtensionAction('Crop'),))

    def test_malformed_language_tag_is_a_warning_in_lenient_mode(self):
        text = rule_doc('      Guide: Cite', '        Lang: english', '        Guideline: Name the site.')
        self.assertEqual([d.code for d in parse(text).errors], [codes.BAD_LANGUAGE_TAG])
        lenient = parse(text, mode=Mode.LENIENT)
        self.assertTrue(lenient.ok)
        self.assertEqual([d.code for d in lenient.warnings], [codes.BAD_LANGUAGE_TAG])

    def test_recovery_reports_every_bad_line(self):
        text = document('User-agent: *', '  Path: /x html', '    Element: p', '      Disallow: Crop', '      Allow: Train',
                        '      Disallow: Jump')
        self.assertEqual([d.code for d in parse(text).errors],
                         [codes.UNKNOWN_ACTION, codes.UNKNOWN_KEYWORD, codes.UNKNOWN_ACTION])

    def test_parse_is_deterministic(self):
        text = document('User-agent: a b!', 'Nope', '  Path: x pdf')
        self.assertEqual(parse(text), parse(text))


class GrammarConformanceTests(SimpleTestCase):
    """One accepted and at least one rejected document per grammar production."""

    ACCEPTED = {
        'ai-txt-file': '',
        'comment-line': document('# top', 'User-agent: *', '  # indented comment', '  Path: / html',
                                 '    Element: *', '      Disallow: *'),
        'user-agent-block': ARTICLE_POLICY,
        'path-block': document('User-agent: GPTBot', '  Path: /a.json json', '    Element: meta.author',
                               '      Disallow: Index', '  Path: /b.xml xml', '    Element: title', '      Disallow: Cite'),
        'element-block': rule_doc('      Disallow: Train'),
        'action-block': rule_doc('      Disallow: *', '      Guide: Cite', '        Lang: en', '        Guideline: Link back.'),
        'disallow-block': rule_doc('      Disallow: Train Summarize Index'),
        'guide-block': GUIDE_POLICY,
        'language-block': rule_doc('      Guide: Cite', '        Lang: fr-FR', '        Guideline: Citez la source.'),
        'guideline-block': rule_doc('      Guide: Cite', '        Lang: en', '        Guideline: Quote  it  "exactly" <here>.'),
        'file-type': document('User-agent: *', '  Path: /feed xml', '    Element: item.title', '      Disallow: Train'),
        'agent-name': document('User-agent: GPTBot Bing_AI crawler01', '  Path: / html', '    Element: p',
                               '      Disallow: Train'),
        'path': document('User-agent: *', '  Path: /a/b_c.d/~e:f@g&h%20-i html', '    Element: p', '      Disallow: Train'),
        'path-segment': document('User-agent: *', '  Path: /docs//guide/ html', '    Element: p', '      Disallow: Train'),
    }

    REJECTED = [
        ('ai-txt-file', 'Hello world\n', codes.UNKNOWN_KEYWORD),
        ('comment-line', '// not a comment\n', codes.UNKNOWN_KEYWORD),
        ('user-agent-block', 'User-agent: GPTBot\n', codes.EMPTY_USER_AGENT),
        ('user-agent-block', 'User-agent:\n', codes.EMPTY_AGENT_LIST),
        ('user-agent-block', document('User-agent: * GPTBot', '  Path: / html', '    Element: p', '      Disallow: *'),
         codes.MIXED_WILDCARD),
        ('user-agent-block', document('User-agent:*', '  Path: / html', '    Element: p', '      Disallow: *'),
         codes.BAD_SEPARATOR),
        ('path-block', document('User-agent: *', '  Path: /x html'), codes.EMPTY_PATH),
        ('path-block', document('Path: /x html', '  Element: p', '    Disallow: *'), codes.MISPLACED_LINE),
        ('element-block', document('User-agent: *', '  Path: /x html', '    Element: p'), codes.EMPTY_ELEMENT),
        ('element-block', document('User-agent: *', '  Path: /x html', '    Element:', '      Disallow: *'),
         codes.MISSING_VALUE),
        ('action-block', rule_doc('      Disallow:'), codes.EMPTY_ACTION_LIST),
        ('action-block', rule_doc('    Disallow: Train'), codes.BAD_DEPTH),
        ('disallow-block', rule_doc('      Disallow: Train Crop'), codes.UNKNOWN_ACTION),
        ('disallow-block', rule_doc('      Disallow: * Train'), codes.MIXED_WILDCARD),
        ('guide-block', rule_doc('      Guide: Summarize'), codes.EMPTY_GUIDE),
        ('language-block', rule_doc('      Guide: Summarize', '        Lang: en-US'), codes.UNPAIRED_LANG),
        ('language-block', rule_doc('      Guide: Summarize', '        Lang: english', '        Guideline: Be brief.'),
         codes.BAD_LANGUAGE_TAG),
        ('guideline-block', rule_doc('      Guide: Summarize', '        Guideline: Be brief.'), codes.UNPAIRED_LANG),
        ('guideline-block', rule_doc('      Guide: Summarize', '        Lang: en', '        Guideline:'),
         codes.MISSING_VALUE),
        ('file-type', document('User-agent: *', '  Path: /x pdf', '    Element: p', '      Disallow: *'),
         codes.BAD_FILE_TYPE),
        ('file-type', document('User-agent: *', '  Path: /x', '    Element: p', '      Disallow: *'), codes.BAD_FILE_TYPE),
        ('agent-name', document('User-agent: GPT-4', '  Path: / html', '    Element: p', '      Disallow: *'),
         codes.BAD_AGENT_NAME),
        ('path', document('User-agent: *', '  Path: articles html', '    Element: p', '      Disallow: *'),
         codes.BAD_PATH),
        ('path-segment', document('User-agent: *', '  Path: /a?b html', '    Element: p', '      Disallow: *'),
         codes.BAD_PATH),
        ('indentation', document('User-agent: *', '   Path: /x html', '    Element: p', '      Disallow: *'),
         codes.BAD_INDENT),
        ('indentation', document('User-agent: *', '  Path: /x html', '\t\tElement: p', '      Disallow: *'),
         codes.BAD_INDENT),
    ]

    def test_accepted(self):
        for production, text in self.ACCEPTED.items():
            with self.subTest(production=production):
                result = parse(text)
                self.assertTrue(result.ok, [d.format() for d in result.diagnostics])
                self.assertEqual(result.warnings, ())

    def test_rejected(self):
        for production, text, code in self.REJECTED:
            with self.subTest(production=production, code=code):
                result = parse(text)
                self.assertFalse(result.ok)
                self.assertIn(code, [d.code for d in result.errors])

    def test_every_production_is_covered_both_ways(self):
        rejected = {production for production, _, _ in self.REJECTED}
        self.assertLessEqual(set(self.ACCEPTED), rejected)


class PrettyPrintTests(SimpleTestCase):

    def test_empty_policy(self):
        self.assertEqual(pretty_print(PolicyFile()), '')

    def test_canonical_document_is_a_fixpoint(self):
        self.assertEqual(pretty_print(parse(ARTICLE_CANONICAL).policy), ARTICLE_CANONICAL)

    def test_comments_are_dropped(self):
        self.assertEqual(pretty_print(parse(ARTICLE_POLICY).policy), ARTICLE_CANONICAL)

    @settings(property_settings, max_examples=500)
    @given(policies())
    def test_round_trip(self, policy):
        text = pretty_print(policy)
        result = parse(text)
        self.assertEqual(result.errors, ())
        self.assertEqual(result.policy, policy)
        self.assertEqual(pretty_print(result.policy), text)


class ParseApiTests(APISimpleTestCase):
    url = '/api/parse/'

    def test_returns_tree_and_warnings(self):
        response = self.client.post(self.url, {'source': ARTICLE_POLICY}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['diagnostics'], [])
        element = response.data['policy']['blocks'][0]['paths'][0]['elements'][1]
        self.assertEqual(element, {'name': 'img', 'rules': [{'kind': 'disallow', 'actions': ['Manipulate']}]})

    def test_parse_errors_are_rejected_with_diagnostics(self):
        source = 'User-agent: GPT Bot!\n  Path: / html\n    Element: p\n      Disallow: *\n'
        response = self.client.post(self.url, {'source': source}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['detail'], 'Policy text has parse errors.')
        [diagnostic] = response.data['diagnostics']
        self.assertEqual(
            {key: diagnostic[key] for key in ('severity', 'code', 'line', 'column')},
            {'severity': 'error', 'code': 'P003', 'line': 1, 'column': 20},
        )

    def test_field_errors(self):
        self.assertIn('source', self.client.post(self.url, {}, format='json').data)
        response = self.client.post(self.url, {'source': '', 'mode': 'sloppy'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('mode', response.data)

    def test_only_post_is_allowed(self):
        self.assertEqual(self.client.get(self.url).status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
