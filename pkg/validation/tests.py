from django.test import SimpleTestCase
from hypothesis import given, settings
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from common.testing import ARTICLE_POLICY, OVERLAP_POLICY, policies, property_settings
from language.diagnostics import Severity
from language.models import Mode
from language.parser import parse, pretty_print

from . import validator as codes
from .selectors import SelectorError, check_selector, is_supported_selector
from .validator import validate


def document(*lines):
    return ''.join(line + '\n' for line in lines)


def codes_of(report):
    return [d.code for d in report.diagnostics]


def lint(text, mode=Mode.STRICT):
    result = parse(text, mode=mode)
    assert result.ok, [d.format() for d in result.errors]
    return validate(result.policy, mode)


class SelectorSubsetTests(SimpleTestCase):

    def test_supported_forms(self):
        for selector in ('p', '*', '.lead', '#main', 'a[href]', 'a[href=x]', 'a[ href = "x y" ]',
                         'div p', 'div > p', 'div>p', 'ul li.item > a[rel=next]', 'p.a.b#c'):
            with self.subTest(selector=selector):
                check_selector(selector)

    def test_rejected_forms(self):
        for selector in ('p:hover', 'a + b', 'a ~ b', 'a, b', '>p', 'p >', '[href', '::before', '', 'a[x="open]'):
            with self.subTest(selector=selector):
                self.assertFalse(is_supported_selector(selector))

    def test_error_carries_position(self):
        with self.assertRaises(SelectorError) as ctx:
            check_selector('div:first-child')
        self.assertEqual(ctx.exception.position, 3)


class ValidatorRuleTests(SimpleTestCase):
    """Each rule has a minimal document that triggers that rule and nothing else."""

    def base(self, *element_lines, path='/x.html html'):
        return document('User-agent: *', f'  Path: {path}', *element_lines)

    def test_clean_document(self):
        report = lint(ARTICLE_POLICY)
        self.assertTrue(report.is_clean)
        self.assertEqual(report.diagnostics, ())

    def test_v1_unsupported_selector(self):
        text = self.base('    Element: p:hover', '      Disallow: *')
        report = lint(text)
        self.assertEqual(codes_of(report), [codes.UNSUPPORTED_SELECTOR])
        self.assertFalse(report.is_clean)
        lenient = lint(text, Mode.LENIENT)
        self.assertEqual(codes_of(lenient), [codes.UNSUPPORTED_SELECTOR])
        self.assertIs(lenient.diagnostics[0].severity, Severity.WARNING)
        self.assertTrue(lenient.is_clean)

    def test_v2_dot_notation(self):
        self.assertEqual(codes_of(lint(self.base('    Element: div > p', '      Disallow: *', path='/d.json json'))),
                         [codes.BAD_OBJECT_PATH])
        self.assertEqual(codes_of(lint(self.base('    Element: p', '      Disallow: *', path='/d.json json'))), [])
        self.assertEqual(codes_of(lint(self.base('    Element: a.b-c.d_e', '      Disallow: *', path='/d.xml xml'))), [])

    def test_v3_language_tag(self):
        text = self.base('    Element: p', '      Guide: Cite', '        Lang: english', '        Guideline: Link us.')
        report = lint(text, Mode.LENIENT)
        self.assertEqual(codes_of(report), [codes.BAD_LANGUAGE_TAG])
        self.assertFalse(report.is_clean)

    def test_v4_disallow_and_guide_overlap(self):
        report = lint(OVERLAP_POLICY)
        self.assertEqual(codes_of(report), [codes.DISALLOW_GUIDE_OVERLAP])
        self.assertTrue(report.is_clean)
        self.assertIn('Summarize', report.diagnostics[0].message)

    def test_v5_duplicate_path_after_normalization(self):
        text = document('User-agent: *', '  Path: /docs/ html', '    Element: p', '      Disallow: Train',
                        '  Path: //docs html', '    Element: img', '      Disallow: Train')
        report = lint(text)
        self.assertEqual(codes_of(report), [codes.DUPLICATE_PATH])
        self.assertEqual(report.diagnostics[0].span.line, 5)

    def test_v6_duplicate_element(self):
        text = self.base('    Element: p', '      Disallow: Train', '    Element: p', '      Disallow: Index')
        self.assertEqual(codes_of(lint(text)), [codes.DUPLICATE_ELEMENT])

    def test_v7_wildcard_guide_next_to_another_guide(self):
        text = self.base('    Element: p', '      Guide: *', '        Lang: en', '        Guideline: Be fair.',
                         '      Guide: Cite', '        Lang: en', '        Guideline: Link us.')
        report = lint(text)
        self.assertEqual(codes_of(report), [codes.OVERLAPPING_GUIDES])
        self.assertEqual(report.diagnostics[0].span.line, 4)

    def test_v8_agent_in_several_blocks(self):
        text = document('User-agent: GPTBot', '  Path: /a html', '    Element: p', '      Disallow: Train',
                        'User-agent: GPTBot', '  Path: /b html', '    Element: p', '      Disallow: Train')
        self.assertEqual(codes_of(lint(text)), [codes.REPEATED_AGENT])

    def test_v8_counts_repeated_wildcard_blocks(self):
        text = document('User-agent: *', '  Path: /a html', '    Element: p', '      Disallow: Train',
                        'User-agent: *', '  Path: /b html', '    Element: p', '      Disallow: Train')
        self.assertEqual(codes_of(lint(text)), [codes.REPEATED_AGENT])

    def test_v9_extension_action(self):
        report = lint(self.base('    Element: img', '      Disallow: Crop Manipulate'), Mode.LENIENT)
        self.assertEqual(codes_of(report), [codes.EXTENSION_ACTION])
        self.assertIn('Crop', report.diagnostics[0].message)

    def test_v10_suspicious_percent_encoding(self):
        self.assertEqual(codes_of(lint(self.base('    Element: p', '      Disallow: *', path='/a%zz html'))),
                         [codes.BAD_PERCENT_ENCODING])
        self.assertEqual(codes_of(lint(self.base('    Element: p', '      Disallow: *', path='/a%2Fb html'))), [])

    def test_validation_is_deterministic(self):
        text = self.base('    Element: p:hover', '      Disallow: *', '    Element: p:hover', '      Disallow: *')
        self.assertEqual(lint(text), lint(text))


class RepresentationIndependenceTests(SimpleTestCase):

    @settings(property_settings, max_examples=200)
    @given(policies())
    def test_reparsed_canonical_form_validates_the_same(self, policy):
        reparsed = parse(pretty_print(policy)).policy
        original = [(d.code, d.severity) for d in validate(policy).diagnostics]
        again = [(d.code, d.severity) for d in validate(reparsed).diagnostics]
        self.assertEqual(original, again)
        self.assertTrue(validate(policy).is_clean)


class ValidateApiTests(APISimpleTestCase):
    url = '/api/validate/'
    source = 'User-agent: *\n  Path: / html\n    Element: p:hover\n      Disallow: *\n'

    def test_strict_report(self):
        response = self.client.post(self.url, {'source': self.source}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertFalse(response.data['is_clean'])
        self.assertEqual([(d['code'], d['severity'], d['line']) for d in response.data['diagnostics']],
                         [(codes.UNSUPPORTED_SELECTOR, 'error', 3)])

    def test_lenient_report(self):
        response = self.client.post(self.url, {'source': self.source, 'mode': 'lenient'}, format='json')
        self.assertTrue(response.data['is_clean'])
        self.assertEqual(response.data['diagnostics'][0]['severity'], 'warning')

    def test_clean_document(self):
        response = self.client.post(self.url, {'source': ARTICLE_POLICY}, format='json')
        self.assertEqual(response.data, {'is_clean': True, 'diagnostics': []})
