from xml.dom import minidom

from django.conf import settings as django_settings
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from common.exceptions import InvalidPolicy, SchemaViolation
from common.testing import ARTICLE_POLICY, GUIDE_POLICY, policies, property_settings
from language.models import (
    ActionList,
    AgentSelector,
    ElementBlock,
    FORBIDDEN_CHAR_RE,
    ExtensionAction,
    FileType,
    Guideline,
    GuideRule,
    LanguageTag,
    Mode,
    PathBlock,
    PolicyFile,
    UserAgentBlock,
)
from language.parser import ILLEGAL_CHARACTER, parse, pretty_print

from .xmlgen import XmlDocument, compile_xml, decode_xml

ARTICLE_XML = """\
<?xml version="1.0" encoding="UTF-8"?>
<ai-txt version="1.0">
  <user-agent>
    <all-agents/>
    <path value="/articles/today.html" file-type="html">
      <element name="p">
        <disallow>
          <action name="Train"/>
          <action name="Summarize"/>
        </disallow>
      </element>
      <element name="img">
        <disallow>
          <action name="Manipulate"/>
        </disallow>
      </element>
    </path>
  </user-agent>
</ai-txt>
"""


def single_guide(text, lang='en'):
    rule = GuideRule(ActionList.all(), (Guideline(LanguageTag(lang), text),))
    element = ElementBlock('p', (rule,))
    return PolicyFile((UserAgentBlock(AgentSelector.of('GPTBot'), (PathBlock('/', FileType.HTML, (element,)),)),))


def wrap(inner):
    return XmlDocument('<?xml version="1.0" encoding="UTF-8"?>\n' + inner)


class CompileTests(SimpleTestCase):

    def test_empty_policy_is_a_self_closing_root(self):
        self.assertEqual(
            compile_xml(PolicyFile()).text,
            '<?xml version="1.0" encoding="UTF-8"?>\n<ai-txt version="1.0"/>\n',
        )

    def test_two_rule_document(self):
        self.assertEqual(compile_xml(parse(ARTICLE_POLICY).policy).text, ARTICLE_XML)

    def test_guides_keep_actions_before_guidelines(self):
        text = compile_xml(parse(GUIDE_POLICY).policy).text
        self.assertIn(
            '<guide>\n          <action name="Summarize"/>\n          <guideline lang="en-US">Please keep',
            text,
        )

    def test_text_is_escaped_and_restored(self):
        policy = single_guide('Use <b> & "quotes"')
        doc = compile_xml(policy)
        self.assertIn('Use &lt;b&gt; &amp; "quotes"', doc.text)
        self.assertEqual(decode_xml(doc), policy)

    def test_output_is_deterministic(self):
        policy = parse(ARTICLE_POLICY).policy
        self.assertEqual(compile_xml(policy).text, compile_xml(parse(ARTICLE_POLICY).policy).text)

    def test_refuses_policy_with_validation_errors(self):
        policy = parse('User-agent: *\n  Path: / html\n    Element: p:hover\n      Disallow: *\n').policy
        with self.assertRaises(InvalidPolicy) as ctx:
            compile_xml(policy)
        self.assertEqual([d.code for d in ctx.exception.diagnostics], ['V001'])
        self.assertIn('p:hover', compile_xml(policy, Mode.LENIENT).text)


    def test_documented_example_is_current(self):
        examples = django_settings.BASE_DIR / 'docs' / 'examples'
        source = (examples / 'news-site.aitxt').read_text(encoding='utf-8')
        expected = (examples / 'news-site.xml').read_text(encoding='utf-8')
        self.assertEqual(compile_xml(parse(source).policy).text, expected)


class DecodeTests(SimpleTestCase):

    def test_round_trip_of_the_two_rule_document(self):
        policy = parse(ARTICLE_POLICY).policy
        self.assertEqual(decode_xml(compile_xml(policy)), policy)

    def test_root_must_be_ai_txt(self):
        with self.assertRaises(SchemaViolation) as ctx:
            decode_xml(wrap('<aitxt version="1.0"/>'))
        self.assertEqual(ctx.exception.location, '/aitxt')

    def test_version_is_checked(self):
        with self.assertRaises(SchemaViolation):
            decode_xml(wrap('<ai-txt version="2.0"/>'))

    def test_unknown_action_depends_on_mode(self):
        doc = wrap(
            '<ai-txt version="1.0"><user-agent><all-agents/>'
            '<path value="/" file-type="html"><element name="img">'
            '<disallow><action name="Crop"/></disallow>'
            '</element></path></user-agent></ai-txt>'
        )
        with self.assertRaises(SchemaViolation) as ctx:
            decode_xml(doc)
        self.assertEqual(ctx.exception.location, '/ai-txt/user-agent[1]/path[1]/element[1]/disallow[1]/action[1]')
        policy = decode_xml(doc, Mode.LENIENT)
        rule = policy.blocks[0].paths[0].elements[0].rules[0]
        self.assertEqual(rule.actions.actions, (ExtensionAction('Crop'),))

    def test_violation_location_points_into_the_document(self):
        doc = wrap(
            '<ai-txt version="1.0"><user-agent><all-agents/>'
            '<path value="/a" file-type="html"><element name="p"><disallow><all-actions/></disallow></element></path>'
            '<path value="/b" file-type="pdf"><element name="p"><disallow><all-actions/></disallow></element></path>'
            '</user-agent></ai-txt>'
        )
        with self.assertRaises(SchemaViolation) as ctx:
            decode_xml(doc)
        self.assertEqual(ctx.exception.location, '/ai-txt/user-agent[1]/path[2]')

    def test_structural_errors(self):
        cases = {
            'unexpected child': '<ai-txt version="1.0"><agent name="x"/></ai-txt>',
            'mixed wildcard': '<ai-txt version="1.0"><user-agent><all-agents/><agent name="A"/>'
                              '<path value="/" file-type="html"><element name="p"><disallow><all-actions/>'
                              '</disallow></element></path></user-agent></ai-txt>',
            'empty guide': '<ai-txt version="1.0"><user-agent><all-agents/><path value="/" file-type="html">'
                           '<element name="p"><guide><all-actions/></guide></element></path></user-agent></ai-txt>',
            'stray text': '<ai-txt version="1.0">hello</ai-txt>',
            'not xml': '<ai-txt version="1.0">',
        }
        for name, inner in cases.items():
            with self.subTest(name), self.assertRaises(SchemaViolation):
                decode_xml(wrap(inner))

    def test_values_that_would_not_reparse_are_rejected(self):
        def element(inner, name='p'):
            return wrap(
                '<ai-txt version="1.0"><user-agent><all-agents/><path value="/" file-type="html">'
                f'<element name="{name}">{inner}</element></path></user-agent></ai-txt>'
            )

        guide = '<guide><all-actions/><guideline lang="en">{}</guideline></guide>'
        cases = {
            'leading blank in guideline': (element(guide.format('  Link back.')), Mode.STRICT),
            'leading tab in guideline': (element(guide.format('&#9;Link back.')), Mode.STRICT),
            'padded element name': (element('<disallow><all-actions/></disallow>', ' p '), Mode.STRICT),
            'control character in element name': (element('<disallow><all-actions/></disallow>', 'p&#13;'), Mode.LENIENT),
            'extension action with a space': (element('<disallow><action name="Crop it"/></disallow>'), Mode.LENIENT),
            'wildcard as an extension action': (element('<disallow><action name="*"/></disallow>'), Mode.LENIENT),
        }
        for name, (doc, mode) in cases.items():
            with self.subTest(name), self.assertRaises(SchemaViolation):
                decode_xml(doc, mode)

    def test_decoded_policy_prints_to_text_that_parses_back(self):
        policy = decode_xml(compile_xml(single_guide('Link\tback.  ')))
        text = pretty_print(policy)
        self.assertIn('Guideline: Link\tback.  \n', text)
        self.assertEqual(parse(text).policy, policy)

    def test_entities_are_refused(self):
        doc = wrap('<!DOCTYPE ai-txt [<!ENTITY x "boom">]><ai-txt version="1.0">&x;</ai-txt>')
        with self.assertRaises(SchemaViolation):
            decode_xml(doc)


class XmlRoundTripPropertyTests(SimpleTestCase):

    @settings(property_settings, max_examples=500)
    @given(policies())
    def test_decode_inverts_compile(self, policy):
        doc = compile_xml(policy)
        minidom.parseString(doc.text.encode('utf-8'))
        self.assertEqual(decode_xml(doc), policy)
        self.assertEqual(compile_xml(decode_xml(doc)).text, doc.text)

    @settings(property_settings, max_examples=300)
    @given(st.text(st.characters(codec='utf-8', exclude_characters='\n'), max_size=40))
    def test_accepted_guideline_text_compiles_to_well_formed_xml(self, text):
        source = (
            'User-agent: *\n  Path: / html\n    Element: p\n      Guide: Cite\n'
            f'        Lang: en\n        Guideline: {text}\n'
        )
        result = parse(source)
        # a single trailing carriage return is part of the CRLF line ending
        body = text[:-1] if text.endswith('\r') else text
        if FORBIDDEN_CHAR_RE.search(body):
            self.assertFalse(result.ok)
            self.assertIn(ILLEGAL_CHARACTER, [d.code for d in result.errors])
            return
        if not result.ok:
            return
        doc = compile_xml(result.policy)
        minidom.parseString(doc.text.encode('utf-8'))
        decoded = decode_xml(doc)
        self.assertEqual(decoded, result.policy)
        self.assertEqual(parse(pretty_print(decoded)).policy, decoded)


class CompileApiTests(APISimpleTestCase):
    url = '/api/compile/'

    def test_returns_xml(self):
        response = self.client.post(self.url, {'source': ARTICLE_POLICY}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response['Content-Type'], 'application/xml; charset=utf-8')
        self.assertEqual(response.content.decode('utf-8'), ARTICLE_XML)

    def test_validation_errors_are_rejected(self):
        source = 'User-agent: *\n  Path: / html\n    Element: p:hover\n      Disallow: *\n'
        response = self.client.post(self.url, {'source': source}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['detail'], 'Policy failed validation.')
        self.assertEqual([d['code'] for d in response.data['diagnostics']], ['V001'])
        lenient = self.client.post(self.url, {'source': source, 'mode': 'lenient'}, format='json')
        self.assertEqual(lenient.status_code, status.HTTP_200_OK)
