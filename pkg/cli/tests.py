import importlib
import json
import os
import tempfile
from io import StringIO
from unittest import mock

from django.core.management import CommandError, call_command
from django.test import LiveServerTestCase, SimpleTestCase, override_settings

from common.testing import ARTICLE_POLICY, BAD_SELECTOR_POLICY, GUIDE_POLICY, SUMMARY_GUIDELINE

from . import testing_urls
from .fetch import OutcomeKind, fetch, policy_url
from .main import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_USAGE, main

BROKEN_POLICY = 'User-agent: GPT Bot!\n  Path: / html\n    Element: p\n      Disallow: *\n'


def run(*argv, stdin=''):
    out, err = StringIO(), StringIO()
    code = main(list(argv), stdin=StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class CliTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, name, text):
        path = os.path.join(self.tmp.name, name)
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
        return path


class ParseCommandTests(CliTestCase):

    def test_outline(self):
        code, out, err = run('parse', self.write('article.aitxt', ARTICLE_POLICY))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(err, '')
        self.assertIn('  path /articles/today.html (html)', out)
        self.assertTrue(out.endswith('1 user-agent block(s), 2 rule(s)\n'))

    def test_json(self):
        code, out, _ = run('parse', self.write('article.aitxt', ARTICLE_POLICY), '--json')
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data['blocks'][0]['agents'], '*')
        self.assertEqual(data['blocks'][0]['paths'][0]['elements'][0]['rules'][0],
                         {'kind': 'disallow', 'actions': ['Train', 'Summarize']})

    def test_parse_errors_exit_1_with_diagnostics(self):
        path = self.write('broken.aitxt', BROKEN_POLICY)
        code, out, err = run('parse', path)
        self.assertEqual(code, EXIT_PARSE)
        self.assertEqual(out, '')
        self.assertIn(f'{path}:1:20: error P003:', err)

    def test_missing_file_exits_3_naming_the_file(self):
        missing = os.path.join(self.tmp.name, 'missing.aitxt')
        code, _, err = run('parse', missing)
        self.assertEqual(code, EXIT_IO)
        self.assertIn(missing, err)

    def test_standard_input(self):
        code, out, _ = run('parse', '-', stdin=ARTICLE_POLICY)
        self.assertEqual(code, EXIT_OK)
        self.assertIn('user-agent *', out)

    def test_usage_errors_exit_64(self):
        for argv in ((), ('parse',), ('bogus', 'x'), ('validate', 'x', '--strict', '--lenient')):
            with self.subTest(argv=argv):
                self.assertEqual(run(*argv)[0], EXIT_USAGE)

    def test_help_exits_0(self):
        code, out, _ = run('--help')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('validate', out)


class ValidateCommandTests(CliTestCase):

    def test_clean_document_prints_nothing(self):
        self.assertEqual(run('validate', self.write('article.aitxt', ARTICLE_POLICY)), (EXIT_OK, '', ''))

    def test_validation_errors_exit_2(self):
        path = self.write('bad.aitxt', BAD_SELECTOR_POLICY)
        code, out, _ = run('validate', path)
        self.assertEqual(code, EXIT_INVALID)
        self.assertTrue(out.startswith(f'{path}:3:5: error V001: '))
        self.assertEqual(len(out.splitlines()), 1)

    def test_lenient_downgrades_selector_errors(self):
        code, out, _ = run('validate', self.write('bad.aitxt', BAD_SELECTOR_POLICY), '--lenient')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('warning V001', out)

    def test_parse_errors_exit_1(self):
        code, out, _ = run('validate', self.write('broken.aitxt', BROKEN_POLICY))
        self.assertEqual(code, EXIT_PARSE)
        self.assertIn('error P003', out)

    def test_missing_file(self):
        self.assertEqual(run('validate', os.path.join(self.tmp.name, 'nope'))[0], EXIT_IO)


class CompileCommandTests(CliTestCase):

    def test_file_output_matches_standard_output(self):
        source = self.write('article.aitxt', ARTICLE_POLICY)
        target = os.path.join(self.tmp.name, 'article.xml')
        code, printed, _ = run('compile', source)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(run('compile', source, '-o', target), (EXIT_OK, '', ''))
        with open(target, encoding='utf-8', newline='') as fh:
            self.assertEqual(fh.read(), printed)
        self.assertIn('<action name="Summarize"/>', printed)

    def test_exit_codes(self):
        self.assertEqual(run('compile', self.write('broken.aitxt', BROKEN_POLICY))[0], EXIT_PARSE)
        code, _, err = run('compile', self.write('bad.aitxt', BAD_SELECTOR_POLICY))
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('error V001', err)
        self.assertEqual(run('compile', self.write('bad.aitxt', BAD_SELECTOR_POLICY), '--lenient')[0], EXIT_OK)
        unwritable = os.path.join(self.tmp.name, 'no', 'such', 'dir.xml')
        self.assertEqual(run('compile', self.write('article.aitxt', ARTICLE_POLICY), '-o', unwritable)[0], EXIT_IO)


class FormatCommandTests(CliTestCase):

    def test_prints_canonical_form(self):
        tabbed = ARTICLE_POLICY.replace('  ', '\t')
        code, out, _ = run('format', self.write('tabs.aitxt', tabbed))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, ARTICLE_POLICY.split('\n', 1)[1])

    def test_parse_errors_exit_1_and_missing_files_exit_3(self):
        path = self.write('broken.aitxt', BROKEN_POLICY)
        code, out, err = run('format', path)
        self.assertEqual((code, out), (EXIT_PARSE, ''))
        self.assertIn(f'{path}:1:20: error P003:', err)
        self.assertEqual(run('format', os.path.join(self.tmp.name, 'nope'))[0], EXIT_IO)

    def test_byte_order_mark_is_dropped(self):
        code, out, _ = run('format', self.write('bom.aitxt', '\ufeff' + ARTICLE_POLICY))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, ARTICLE_POLICY.split('\n', 1)[1])


class QueryCommandTests(CliTestCase):

    def setUp(self):
        super().setUp()
        self.fixture = self.write('fixture.aitxt', ARTICLE_POLICY)

    def query(self, *extra):
        return run('query', self.fixture, '--agent', 'AnyBot', '--path', '/articles/today.html', *extra)

    def test_json_decision(self):
        code, out, _ = self.query('--element', 'p', '--action', 'Train', '--json')
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data['decision'], 'disallowed')
        self.assertEqual(data['guidelines'], {})
        self.assertEqual(data['trace'][-1], {'role': 'rule', 'line': 5, 'column': 7})

    def test_every_decision_exits_0(self):
        self.assertEqual(self.query('--element', 'p', '--action', 'Translate'), (EXIT_OK, 'allowed\n', ''))
        guide = self.write('guide.aitxt', GUIDE_POLICY)
        code, out, _ = run('query', guide, '--agent', 'A', '--path', '/articles/today.html', '--element', 'p',
                           '--action', 'Summarize')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.split('\n')[:2], ['guided', f'  [en-US] {SUMMARY_GUIDELINE}'])

    def test_usage_errors(self):
        self.assertEqual(self.query('--element', 'p', '--action', 'Crop')[0], EXIT_USAGE)
        self.assertEqual(self.query('--element', 'p')[0], EXIT_USAGE)
        self.assertEqual(run('query', self.fixture, '--agent', 'AnyBot', '--path', 'x', '--element', 'p',
                             '--action', 'Train')[0], EXIT_USAGE)

    def test_lenient_accepts_extension_actions(self):
        self.assertEqual(self.query('--element', 'p', '--action', 'Crop', '--lenient'), (EXIT_OK, 'allowed\n', ''))

    def test_all_lists_applicable_rules(self):
        code, out, _ = run('query', self.fixture, '--agent', 'AnyBot', '--all')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.splitlines(), [
            '/articles/today.html (html) p: Disallow: Train Summarize',
            '/articles/today.html (html) img: Disallow: Manipulate',
        ])

    def test_from_compiled_xml(self):
        xml_path = os.path.join(self.tmp.name, 'fixture.xml')
        run('compile', self.fixture, '-o', xml_path)
        code, out, _ = run('query', xml_path, '--from-xml', '--agent', 'AnyBot', '--path', '/articles/today.html',
                           '--element', 'img', '--action', 'Manipulate', '--json')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['decision'], 'disallowed')

    def test_schema_violation_exits_1(self):
        bad = self.write('bad.xml', '<aitxt version="1.0"/>')
        code, _, err = run('query', bad, '--from-xml', '--agent', 'A', '--all')
        self.assertEqual(code, EXIT_PARSE)
        self.assertIn('/aitxt', err)

    def test_parse_errors_exit_1(self):
        broken = self.write('broken.aitxt', BROKEN_POLICY)
        self.assertEqual(run('query', broken, '--agent', 'A', '--all')[0], EXIT_PARSE)

    def test_missing_file_exits_3(self):
        missing = os.path.join(self.tmp.name, 'nope.aitxt')
        code, out, err = run('query', missing, '--agent', 'A', '--path', '/', '--element', 'p', '--action', 'Train')
        self.assertEqual((code, out), (EXIT_IO, ''))
        self.assertIn(missing, err)
        self.assertEqual(run('query', missing, '--agent', 'A', '--all')[0], EXIT_IO)

    def test_extension_action_that_cannot_exist_is_a_usage_error(self):
        code, _, err = self.query('--element', 'p', '--action', '*', '--lenient')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('invalid extension action', err)


class PromptCommandTests(CliTestCase):

    def test_prompt(self):
        code, out, _ = run('prompt', self.write('guide.aitxt', GUIDE_POLICY), '--agent', 'AnyBot', '--lang', 'en-US')
        self.assertEqual(code, EXIT_OK)
        self.assertIn(SUMMARY_GUIDELINE, out)

    def test_no_fallback_and_explain(self):
        code, out, _ = run('prompt', self.write('guide.aitxt', GUIDE_POLICY), '--agent', 'AnyBot', '--lang', 'fr-FR',
                           '--no-fallback', '--explain')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('(no guideline available in fr-FR)', out)
        self.assertIn('Action meanings:\n- Summarize: ', out)

    def test_bad_language_is_a_usage_error(self):
        self.assertEqual(run('prompt', self.write('g.aitxt', GUIDE_POLICY), '--agent', 'A', '--lang', 'en US')[0],
                         EXIT_USAGE)

    def test_parse_errors_exit_1(self):
        path = self.write('broken.aitxt', BROKEN_POLICY)
        code, out, err = run('prompt', path, '--agent', 'A', '--lang', 'en')
        self.assertEqual((code, out), (EXIT_PARSE, ''))
        self.assertIn('error P003', err)

    def test_missing_file_exits_3(self):
        missing = os.path.join(self.tmp.name, 'nope.aitxt')
        code, _, err = run('prompt', missing, '--agent', 'A', '--lang', 'en')
        self.assertEqual(code, EXIT_IO)
        self.assertIn(missing, err)


class ManagementCommandTests(CliTestCase):

    def test_success_and_failure(self):
        out = StringIO()
        call_command('aitxt', 'format', self.write('article.aitxt', ARTICLE_POLICY), stdout=out)
        self.assertTrue(out.getvalue().startswith('User-agent: *\n'))
        with self.assertRaises(CommandError) as ctx:
            call_command('aitxt', 'validate', self.write('bad.aitxt', BAD_SELECTOR_POLICY), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_INVALID)


class PolicyUrlTests(SimpleTestCase):

    def test_path_query_and_fragment_are_dropped(self):
        self.assertEqual(policy_url('https://example.com/blog/post?x=1#top'), 'https://example.com/ai.txt')
        self.assertEqual(policy_url('http://127.0.0.1:8000'), 'http://127.0.0.1:8000/ai.txt')

    def test_rejects_non_http_origins(self):
        for origin in ('ftp://example.com', 'example.com', 'https://'):
            with self.subTest(origin=origin), self.assertRaises(ValueError):
                policy_url(origin)

    def test_unreachable_host_is_a_transport_error(self):
        outcome = fetch('http://127.0.0.1:9', timeout=2)
        self.assertIs(outcome.kind, OutcomeKind.TRANSPORT_ERROR)
        self.assertIsNone(outcome.text)


class FetchSettingsTests(SimpleTestCase):

    def test_timeout_is_read_from_the_environment(self):
        from config import settings as project_settings

        self.addCleanup(importlib.reload, project_settings)
        with mock.patch.dict(os.environ, {'AITXT_TIMEOUT_SECS': '2.5'}):
            self.assertEqual(importlib.reload(project_settings).AITXT_FETCH_TIMEOUT, 2.5)

    @override_settings(AITXT_FETCH_TIMEOUT=2.5, AITXT_MAX_REDIRECTS=3)
    def test_settings_reach_the_request(self):
        session = mock.MagicMock()
        session.get.return_value.__enter__.return_value.status_code = 404
        outcome = fetch('https://example.com', session=session)
        self.assertIs(outcome.kind, OutcomeKind.NO_POLICY)
        self.assertEqual(session.get.call_args.kwargs['timeout'], 2.5)
        self.assertEqual(session.max_redirects, 3)
        session.close.assert_not_called()


@override_settings(ROOT_URLCONF='cli.testing_urls')
class FetchTests(LiveServerTestCase):

    def fetch_with(self, scenario, **kwargs):
        with self.settings(STUB_AI_TXT_SCENARIO=scenario):
            return fetch(self.live_server_url + '/some/page?q=1', **kwargs)

    def test_found(self):
        outcome = self.fetch_with('found')
        self.assertIs(outcome.kind, OutcomeKind.FOUND)
        self.assertEqual(outcome.text, ARTICLE_POLICY)
        self.assertEqual(outcome.url, self.live_server_url + '/ai.txt')

    def test_missing_and_gone_mean_no_policy(self):
        for scenario in ('missing', 'gone'):
            with self.subTest(scenario=scenario):
                self.assertIs(self.fetch_with(scenario).kind, OutcomeKind.NO_POLICY)

    def test_server_error(self):
        outcome = self.fetch_with('error')
        self.assertIs(outcome.kind, OutcomeKind.TRANSPORT_ERROR)
        self.assertEqual(outcome.detail, 'HTTP 500')

    def test_oversize_body(self):
        self.assertIs(self.fetch_with('oversize').kind, OutcomeKind.TOO_LARGE)
        self.assertIs(self.fetch_with('oversize', max_bytes=1024 * 1024).kind, OutcomeKind.FOUND)

    def test_body_must_be_utf8(self):
        self.assertIs(self.fetch_with('not-utf8').kind, OutcomeKind.TRANSPORT_ERROR)

    def test_redirects_are_followed_up_to_the_limit(self):
        self.assertEqual(self.fetch_with('redirect').text, ARTICLE_POLICY)
        outcome = self.fetch_with('loop')
        self.assertIs(outcome.kind, OutcomeKind.TRANSPORT_ERROR)
        self.assertIn('redirects', outcome.detail)

    def test_redirect_limit_is_inclusive(self):
        self.assertEqual(self.fetch_with('chain-5').text, ARTICLE_POLICY)
        outcome = self.fetch_with('chain-6')
        self.assertIs(outcome.kind, OutcomeKind.TRANSPORT_ERROR)
        self.assertEqual(outcome.detail, 'more than 5 redirects')
        self.assertIs(self.fetch_with('chain-2', max_redirects=1).kind, OutcomeKind.TRANSPORT_ERROR)

    def test_byte_order_mark_is_dropped(self):
        self.assertEqual(self.fetch_with('bom').text, ARTICLE_POLICY)

    def test_slow_server_times_out(self):
        with self.settings(AITXT_FETCH_TIMEOUT=testing_urls.SLOW_SECONDS / 5):
            outcome = self.fetch_with('slow')
        self.assertIs(outcome.kind, OutcomeKind.TRANSPORT_ERROR)
        self.assertIs(self.fetch_with('slow', timeout=testing_urls.SLOW_SECONDS * 5).kind, OutcomeKind.FOUND)

    def run_fetch(self, scenario, *extra):
        with self.settings(STUB_AI_TXT_SCENARIO=scenario):
            return run('fetch', self.live_server_url, *extra)

    def test_fetch_command_exit_codes(self):
        self.assertEqual(self.run_fetch('found'), (EXIT_OK, ARTICLE_POLICY, ''))
        code, out, err = self.run_fetch('missing')
        self.assertEqual((code, out), (EXIT_OK, ''))
        self.assertIn('no policy', err)
        self.assertEqual(self.run_fetch('error')[0], EXIT_IO)
        self.assertEqual(self.run_fetch('oversize')[0], EXIT_IO)
        self.assertEqual(run('fetch', 'not-a-url')[0], EXIT_USAGE)

    def test_fetch_compile_equals_offline_compile(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'article.aitxt')
            with open(path, 'w', encoding='utf-8', newline='') as fh:
                fh.write(ARTICLE_POLICY)
            offline = run('compile', path)
        fetched = self.run_fetch('found', '--compile')
        self.assertEqual(fetched, offline)
        self.assertEqual(fetched[0], EXIT_OK)

    def test_no_policy_compiles_and_validates_as_empty(self):
        code, out, _ = self.run_fetch('missing', '--compile')
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, '<?xml version="1.0" encoding="UTF-8"?>\n<ai-txt version="1.0"/>\n')
        self.assertEqual(self.run_fetch('missing', '--validate')[:2], (EXIT_OK, ''))

    def test_fetch_validate_reports_validation_errors(self):
        code, out, _ = self.run_fetch('invalid', '--validate')
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn(':3:5: error V001: ', out)
        self.assertEqual(self.run_fetch('invalid', '--validate', '--strict')[0], EXIT_INVALID)
        self.assertEqual(self.run_fetch('invalid', '--validate', '--lenient')[0], EXIT_OK)

    def test_fetch_compile_on_transport_errors(self):
        for scenario in ('error', 'oversize', 'loop'):
            with self.subTest(scenario=scenario):
                code, out, err = self.run_fetch(scenario, '--compile')
                self.assertEqual((code, out), (EXIT_IO, ''))
                self.assertIn('/ai.txt', err)
        code, out, err = self.run_fetch('invalid', '--compile')
        self.assertEqual((code, out), (EXIT_INVALID, ''))
        self.assertIn('error V001', err)
