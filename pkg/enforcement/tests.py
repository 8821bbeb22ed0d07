import re
from dataclasses import replace
from itertools import product

from django.test import SimpleTestCase
from hypothesis import given, settings
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from common.testing import (
    ARTICLE_POLICY,
    FRESH_AGENT,
    FRESH_ELEMENT,
    FRESH_PATH,
    GUIDE_POLICY,
    OVERLAP_POLICY,
    SUMMARY_GUIDELINE,
    policies,
    property_settings,
)
from language.models import ActionList, ActionName, DisallowRule, ExtensionAction, LanguageTag, PolicyFile
from language.parser import parse

from .policy import (
    Decision,
    DecisionKind,
    MatchTrace,
    Query,
    applicable_rules,
    evaluate,
    normalize_path,
    select_agent_blocks,
)
from .promptgen import NO_RULES, PromptRequest, render_prompt
from .serializers import DecisionSerializer

ARTICLE = '/articles/today.html'


def document(*lines):
    return ''.join(line + '\n' for line in lines)


def q(element, action, agent='AnyBot', path=ARTICLE):
    return Query(agent, path, element, action)


def oracle(policy, agent, path, element, action):
    """Literal rule scan: returns (kind, guidelines) without using the engine."""
    def norm(p):
        p = re.sub('/+', '/', p)
        return p[:-1] if len(p) > 1 and p.endswith('/') else p

    named = [b for b in policy.blocks if not b.agents.is_all and agent in b.agents.names]
    blocks = named if named else [b for b in policy.blocks if b.agents.is_all]
    disallowed, guided, guidelines = False, False, {}
    for block in blocks:
        for path_block in block.paths:
            if norm(path_block.path) != norm(path):
                continue
            for element_block in path_block.elements:
                if element_block.name not in (element, '*'):
                    continue
                for rule in element_block.rules:
                    if not (rule.actions.is_all or action in rule.actions.actions):
                        continue
                    if isinstance(rule, DisallowRule):
                        disallowed = True
                    else:
                        guided = True
                        for guideline in rule.guidelines:
                            guidelines[guideline.language] = guideline.text
    if disallowed:
        return DecisionKind.DISALLOWED, {}
    if guided:
        return DecisionKind.GUIDED, guidelines
    return DecisionKind.ALLOWED, {}


def query_grid(policy):
    agents = {FRESH_AGENT}
    paths = {FRESH_PATH}
    elements = {FRESH_ELEMENT}
    for block in policy.blocks:
        agents.update(block.agents.names)
        for path in block.paths:
            paths.update((path.path, normalize_path(path.path)))
            elements.update(e.name for e in path.elements)
    return product(sorted(agents), sorted(paths), sorted(elements), list(ActionName))


class NormalizePathTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(normalize_path('/wiki/Robots.txt'), '/wiki/Robots.txt')
        self.assertEqual(normalize_path('//a//b/'), '/a/b')
        self.assertEqual(normalize_path('/'), '/')
        self.assertEqual(normalize_path('//'), '/')
        self.assertEqual(normalize_path('/A%2f/'), '/A%2f')


class QueryTests(SimpleTestCase):

    def test_rejects_malformed_queries(self):
        with self.assertRaises(ValueError):
            Query('Any Bot', '/', 'p', ActionName.TRAIN)
        with self.assertRaises(ValueError):
            Query('AnyBot', 'index.html', 'p', ActionName.TRAIN)

    def test_decision_invariants(self):
        with self.assertRaises(ValueError):
            Decision(DecisionKind.GUIDED)
        with self.assertRaises(ValueError):
            Decision(DecisionKind.DISALLOWED, trace=MatchTrace())
        with self.assertRaises(ValueError):
            Decision(DecisionKind.ALLOWED, {LanguageTag('en'): 'x'})


class AgentSelectionTests(SimpleTestCase):

    def setUp(self):
        self.policy = parse(document(
            'User-agent: GPTBot', '  Path: / html', '    Element: p', '      Disallow: Train',
            'User-agent: *', '  Path: / html', '    Element: p', '      Disallow: Index',
            'User-agent: GPTBot Bing_AI', '  Path: / html', '    Element: p', '      Disallow: Cite',
        )).policy

    def test_exact_names_shadow_wildcard(self):
        blocks = select_agent_blocks(self.policy, 'GPTBot')
        self.assertEqual(blocks, [self.policy.blocks[0], self.policy.blocks[2]])
        self.assertIs(evaluate(self.policy, q('p', ActionName.INDEX, 'GPTBot', '/')).kind, DecisionKind.ALLOWED)

    def test_unknown_agent_falls_back_to_wildcard(self):
        self.assertEqual(select_agent_blocks(self.policy, 'ClaudeBot'), [self.policy.blocks[1]])
        self.assertIs(evaluate(self.policy, q('p', ActionName.INDEX, 'ClaudeBot', '/')).kind, DecisionKind.DISALLOWED)

    def test_blocks_naming_the_same_agent_merge(self):
        self.assertIs(evaluate(self.policy, q('p', ActionName.CITE, 'GPTBot', '/')).kind, DecisionKind.DISALLOWED)
        entries = applicable_rules(self.policy, 'GPTBot')
        self.assertEqual([e.rule.actions for e in entries],
                         [ActionList.of(ActionName.TRAIN), ActionList.of(ActionName.CITE)])

    def test_empty_policy(self):
        self.assertEqual(select_agent_blocks(PolicyFile(), 'GPTBot'), [])
        self.assertEqual(applicable_rules(PolicyFile(), 'GPTBot'), [])
        self.assertIs(evaluate(PolicyFile(), q('p', ActionName.TRAIN)).kind, DecisionKind.ALLOWED)


class EvaluateTests(SimpleTestCase):

    def test_two_rule_document_matrix(self):
        policy = parse(ARTICLE_POLICY).policy
        disallowed = {('p', ActionName.TRAIN), ('p', ActionName.SUMMARIZE), ('img', ActionName.MANIPULATE)}
        for element, action in product(('p', 'img'), ActionName):
            with self.subTest(element=element, action=action):
                expected = DecisionKind.DISALLOWED if (element, action) in disallowed else DecisionKind.ALLOWED
                self.assertIs(evaluate(policy, q(element, action)).kind, expected)

    def test_trace_of_a_disallow(self):
        policy = parse(ARTICLE_POLICY).policy
        decision = evaluate(policy, q('p', ActionName.TRAIN))
        block = policy.blocks[0]
        p = block.paths[0].elements[0]
        self.assertEqual(decision.trace, MatchTrace((block,), (block.paths[0],), (p,), (p.rules[0],)))
        self.assertEqual(decision.trace.deciding_rules[0].span.line, 5)

    def test_allowed_has_no_deciding_rules(self):
        decision = evaluate(parse(ARTICLE_POLICY).policy, q('p', ActionName.TRANSLATE))
        self.assertEqual(decision.trace.deciding_rules, ())
        self.assertEqual(decision.guidelines, {})

    def test_guided_carries_guidelines(self):
        decision = evaluate(parse(GUIDE_POLICY).policy, q('p', ActionName.SUMMARIZE))
        self.assertIs(decision.kind, DecisionKind.GUIDED)
        self.assertEqual(decision.guidelines, {LanguageTag('en-US'): SUMMARY_GUIDELINE})

    def test_disallow_beats_guide(self):
        decision = evaluate(parse(OVERLAP_POLICY).policy, q('p', ActionName.SUMMARIZE))
        self.assertIs(decision.kind, DecisionKind.DISALLOWED)
        self.assertEqual(decision.guidelines, {})

    def test_removing_the_single_deciding_rule_changes_the_decision(self):
        policy = parse(OVERLAP_POLICY).policy
        decision = evaluate(policy, q('p', ActionName.SUMMARIZE))
        [rule] = decision.trace.deciding_rules
        element = policy.blocks[0].paths[0].elements[0]
        trimmed = replace(element, rules=tuple(r for r in element.rules if r is not rule))
        path = replace(policy.blocks[0].paths[0], elements=(trimmed,))
        smaller = PolicyFile((replace(policy.blocks[0], paths=(path,)),))
        self.assertIs(evaluate(smaller, q('p', ActionName.SUMMARIZE)).kind, DecisionKind.GUIDED)

    def test_later_guideline_wins_on_language_collision(self):
        policy = parse(document(
            'User-agent: *', '  Path: / html',
            '    Element: *', '      Guide: Cite', '        Lang: en', '        Guideline: First.',
            '        Lang: de', '        Guideline: Erste.',
            '    Element: p', '      Guide: *', '        Lang: en', '        Guideline: Second.',
        )).policy
        decision = evaluate(policy, q('p', ActionName.CITE, path='/'))
        self.assertEqual(decision.guidelines, {LanguageTag('en'): 'Second.', LanguageTag('de'): 'Erste.'})
        self.assertEqual(len(decision.trace.deciding_rules), 2)

    def test_paths_match_after_normalization_only(self):
        policy = parse(document('User-agent: *', '  Path: /docs/ html', '    Element: p', '      Disallow: *')).policy
        self.assertIs(evaluate(policy, q('p', ActionName.TRAIN, path='//docs')).kind, DecisionKind.DISALLOWED)
        self.assertIs(evaluate(policy, q('p', ActionName.TRAIN, path='/docs/page')).kind, DecisionKind.ALLOWED)
        self.assertIs(evaluate(policy, q('p', ActionName.TRAIN, path='/DOCS')).kind, DecisionKind.ALLOWED)

    def test_wildcard_element_disallowing_everything(self):
        policy = parse(document('User-agent: *', '  Path: / html', '    Element: *', '      Disallow: *',
                                '    Element: p', '      Guide: Cite', '        Lang: en', '        Guideline: Ok.')).policy
        for element, action in product(('p', 'img', 'section'), ActionName):
            self.assertIs(evaluate(policy, q(element, action, path='/')).kind, DecisionKind.DISALLOWED)

    def test_extension_actions_are_matched_by_name(self):
        policy = parse(document('User-agent: *', '  Path: / html', '    Element: img', '      Disallow: Crop'),
                       mode='lenient').policy
        self.assertIs(evaluate(policy, q('img', ExtensionAction('Crop'), path='/')).kind, DecisionKind.DISALLOWED)
        self.assertIs(evaluate(policy, q('img', ActionName.MANIPULATE, path='/')).kind, DecisionKind.ALLOWED)

    def test_applicable_rules_flatten_in_source_order(self):
        entries = applicable_rules(parse(ARTICLE_POLICY).policy, 'AnyBot')
        self.assertEqual([(e.path, e.element) for e in entries], [(ARTICLE, 'p'), (ARTICLE, 'img')])

    def test_decision_json_shape(self):
        data = DecisionSerializer(evaluate(parse(GUIDE_POLICY).policy, q('p', ActionName.SUMMARIZE))).data
        self.assertEqual(data['decision'], 'guided')
        self.assertEqual(data['guidelines'], {'en-US': SUMMARY_GUIDELINE})
        self.assertEqual([entry['role'] for entry in data['trace']], ['agent-block', 'path', 'element', 'rule'])
        self.assertEqual((data['trace'][-1]['line'], data['trace'][-1]['column']), (4, 7))


class EvaluatePropertyTests(SimpleTestCase):

    @settings(property_settings, max_examples=200)
    @given(policies())
    def test_matches_brute_force_oracle(self, policy):
        for agent, path, element, action in query_grid(policy):
            decision = evaluate(policy, Query(agent, path, element, action))
            self.assertEqual((decision.kind, decision.guidelines), oracle(policy, agent, path, element, action))
            self.assertEqual(bool(decision.trace.deciding_rules), decision.kind is not DecisionKind.ALLOWED)

    @settings(property_settings, max_examples=100)
    @given(policies().filter(lambda p: p.blocks))
    def test_adding_a_disallow_never_lifts_one(self, policy):
        block = policy.blocks[0]
        path = block.paths[0]
        element = path.elements[0]
        extra = replace(element, rules=element.rules + (DisallowRule(ActionList.of(ActionName.INDEX)),))
        bigger = replace(policy, blocks=(
            replace(block, paths=(replace(path, elements=(extra,) + path.elements[1:]),) + block.paths[1:]),
        ) + policy.blocks[1:])
        for agent, path_value, name, action in query_grid(policy):
            query = Query(agent, path_value, name, action)
            if evaluate(policy, query).kind is DecisionKind.DISALLOWED:
                self.assertIs(evaluate(bigger, query).kind, DecisionKind.DISALLOWED)


class RenderPromptTests(SimpleTestCase):

    def request(self, lang='en-US', **kwargs):
        return PromptRequest('AnyBot', LanguageTag(lang), **kwargs)

    def test_empty_policy(self):
        self.assertEqual(render_prompt(PolicyFile(), self.request()), NO_RULES)
        self.assertEqual(NO_RULES, 'No content rules declared for this agent.')

    def test_two_rule_document(self):
        self.assertEqual(render_prompt(parse(ARTICLE_POLICY).policy, self.request()), '\n'.join([
            'You must obey the following content rules for this website.',
            'For path /articles/today.html (html):',
            '- element p:',
            '  - you must not perform: Train, Summarize',
            '- element img:',
            '  - you must not perform: Manipulate',
        ]))

    def test_guideline_is_embedded_verbatim_and_output_is_stable(self):
        policy = parse(GUIDE_POLICY).policy
        first = render_prompt(policy, self.request())
        self.assertIn(f'  - when you Summarize, follow: {SUMMARY_GUIDELINE}', first.split('\n'))
        self.assertEqual(first, render_prompt(parse(GUIDE_POLICY).policy, self.request()))

    def test_language_fallback(self):
        policy = parse(GUIDE_POLICY).policy
        self.assertIn(SUMMARY_GUIDELINE, render_prompt(policy, self.request('fr-FR')))
        strict = render_prompt(policy, self.request('fr-FR', fallback=False))
        self.assertIn('  - when you Summarize: (no guideline available in fr-FR)', strict.split('\n'))
        self.assertNotIn(SUMMARY_GUIDELINE, strict)

    def test_preferred_language_is_chosen(self):
        policy = parse(document(
            'User-agent: *', '  Path: / html', '    Element: p', '      Guide: Cite',
            '        Lang: en', '        Guideline: Cite us.', '        Lang: de', '        Guideline: Zitieren.',
        )).policy
        self.assertIn('follow: Zitieren.', render_prompt(policy, self.request('de')))
        self.assertIn('follow: Cite us.', render_prompt(policy, self.request('fr')))

    def test_disallowed_actions_are_not_rendered_as_guided(self):
        text = render_prompt(parse(OVERLAP_POLICY).policy, self.request())
        self.assertIn('  - you must not perform: Summarize', text)
        self.assertNotIn('when you Summarize', text)

    def test_wildcards(self):
        policy = parse(document(
            'User-agent: *', '  Path: / html', '    Element: *', '      Disallow: *',
            '    Element: p', '      Guide: *', '        Lang: en', '        Guideline: Be kind.',
        )).policy
        lines = render_prompt(policy, self.request('en')).split('\n')
        self.assertIn('  - you must not perform: any action', lines)
        self.assertNotIn('Be kind.', '\n'.join(lines))
        self.assertIs(evaluate(policy, q('p', ActionName.CITE, path='/')).kind, DecisionKind.DISALLOWED)

    def test_guide_all_survives_a_specific_wildcard_disallow(self):
        policy = parse(document(
            'User-agent: *', '  Path: / html', '    Element: *', '      Disallow: Train',
            '    Element: p', '      Guide: *', '        Lang: en', '        Guideline: Be kind.',
        )).policy
        lines = render_prompt(policy, self.request('en')).split('\n')
        self.assertIn('  - when you perform any action, follow: Be kind.', lines)
        self.assertIs(evaluate(policy, q('p', ActionName.CITE, path='/')).kind, DecisionKind.GUIDED)

    def test_wildcard_element_disallow_drops_guidance_on_other_elements(self):
        policy = parse(document(
            'User-agent: *',
            '  Path: /articles/ html', '    Element: *', '      Disallow: Summarize',
            '  Path: /articles json', '    Element: p', '      Guide: Summarize Cite',
            '        Lang: en', '        Guideline: Link back.',
        )).policy
        text = render_prompt(policy, self.request('en'))
        self.assertNotIn('when you Summarize', text)
        self.assertIn('  - when you Cite, follow: Link back.', text.split('\n'))
        self.assertIs(evaluate(policy, q('p', ActionName.SUMMARIZE, path='/articles')).kind, DecisionKind.DISALLOWED)
        self.assertIs(evaluate(policy, q('p', ActionName.CITE, path='/articles')).kind, DecisionKind.GUIDED)

    @given(policies())
    @settings(property_settings, max_examples=60)
    def test_rendered_guidance_is_never_disallowed_by_the_engine(self, policy):
        text = render_prompt(policy, self.request())
        path = None
        element = None
        for line in text.split('\n'):
            if line.startswith('For path '):
                path = line[len('For path '):].rsplit(' (', 1)[0]
            elif line.startswith('- element '):
                element = line[len('- element '):-1]
            elif line.startswith('  - when you ') and not line.startswith('  - when you perform any action'):
                name = line[len('  - when you '):].split(',')[0].split(':')[0]
                action = self.action_named(name)
                if action is not None:
                    decision = evaluate(policy, q(element, action, path=path))
                    self.assertIsNot(decision.kind, DecisionKind.DISALLOWED, line)

    @staticmethod
    def action_named(name):
        try:
            return ActionName(name)
        except ValueError:
            return None

    def test_other_agents_rules_are_not_rendered(self):
        policy = parse(document('User-agent: GPTBot', '  Path: / html', '    Element: p', '      Disallow: *')).policy
        self.assertEqual(render_prompt(policy, self.request()), NO_RULES)

    def test_explain_actions(self):
        text = render_prompt(parse(ARTICLE_POLICY).policy, self.request(explain_actions=True))
        tail = text.split('Action meanings:\n', 1)[1].split('\n')
        self.assertEqual([line.split(':')[0] for line in tail], ['- Train', '- Summarize', '- Manipulate'])

    def test_rendered_disallows_agree_with_the_engine(self):
        policy = parse(ARTICLE_POLICY).policy
        text = render_prompt(policy, self.request())
        for element, actions in (('p', 'Train, Summarize'), ('img', 'Manipulate')):
            self.assertIn(f'- element {element}:\n  - you must not perform: {actions}', text)
            for name in actions.split(', '):
                self.assertIs(evaluate(policy, q(element, ActionName(name))).kind, DecisionKind.DISALLOWED)


class QueryApiTests(APISimpleTestCase):
    url = '/api/query/'

    def post(self, **fields):
        data = {'source': ARTICLE_POLICY, 'agent': 'AnyBot', 'path': '/articles/today.html', 'element': 'p'}
        data.update(fields)
        return self.client.post(self.url, data, format='json')

    def test_disallowed_with_trace(self):
        response = self.post(action='Train')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['decision'], 'disallowed')
        self.assertEqual(response.data['trace'][-1], {'role': 'rule', 'line': 5, 'column': 7})

    def test_guided(self):
        response = self.post(source=GUIDE_POLICY, action='Summarize')
        self.assertEqual(response.data['decision'], 'guided')
        self.assertEqual(response.data['guidelines'], {'en-US': SUMMARY_GUIDELINE})

    def test_unknown_action_depends_on_mode(self):
        strict = self.post(action='Crop')
        self.assertEqual(strict.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('action', strict.data)
        lenient = self.post(action='Crop', mode='lenient')
        self.assertEqual(lenient.data['decision'], 'allowed')
        self.assertEqual([entry['role'] for entry in lenient.data['trace']], ['agent-block', 'path', 'element'])
        for token in ('*', 'Crop\x01'):
            with self.subTest(token=token):
                rejected = self.post(action=token, mode='lenient')
                self.assertEqual(rejected.status_code, status.HTTP_400_BAD_REQUEST)
                self.assertIn('action', rejected.data)

    def test_field_validation(self):
        self.assertIn('path', self.post(action='Train', path='articles').data)
        self.assertIn('agent', self.post(action='Train', agent='Any Bot').data)


class PromptApiTests(APISimpleTestCase):
    url = '/api/prompt/'

    def test_prompt_matches_renderer(self):
        response = self.client.post(self.url, {'source': GUIDE_POLICY, 'agent': 'AnyBot', 'lang': 'en-US'},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        expected = render_prompt(parse(GUIDE_POLICY).policy, PromptRequest('AnyBot', LanguageTag('en-US')))
        self.assertEqual(response.data, {'prompt': expected})

    def test_bad_language(self):
        response = self.client.post(self.url, {'source': GUIDE_POLICY, 'agent': 'AnyBot', 'lang': 'en US'},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('lang', response.data)
