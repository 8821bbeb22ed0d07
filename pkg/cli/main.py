"""
Command-line entry point: `python manage.py aitxt <command> ...`.

Exit codes:
    0   success (a query decision, whatever it is, counts as success)
    1   parse errors, or XML that does not follow the schema
    2   validation errors
    3   I/O or transport failure
    64  usage error
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import redirect_stderr, redirect_stdout

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_USAGE = 64

STDIN_NAME = '<stdin>'

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class CommandFailed(Exception):
    def __init__(self, code, message=''):
        self.code = code
        super().__init__(message)


class _ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def _setup_django():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    from django.apps import apps
    if not apps.ready:
        import django
        django.setup()


class _Runner:
    """Holds the streams of one invocation and implements each subcommand."""

    def __init__(self, stdin, stdout, stderr):
        self.stdin = stdin
        self.stdout = stdout
        self.stderr = stderr

    # Shared steps

    def out(self, text=''):
        self.stdout.write(text + '\n')

    def err(self, text):
        self.stderr.write(text + '\n')

    def read_source(self, path):
        if path == '-':
            return self.stdin.read(), STDIN_NAME
        try:
            with open(path, encoding='utf-8', newline='') as fh:
                return fh.read(), path
        except (OSError, UnicodeDecodeError) as exc:
            raise CommandFailed(EXIT_IO, f'cannot read {path}: {exc}')

    def report(self, diagnostics, name, stream=None):
        stream = stream or self.stderr
        for diagnostic in diagnostics:
            stream.write(diagnostic.format(name) + '\n')

    def parse_text(self, text, name, mode, diagnostics_to=None):
        from language.parser import parse

        result = parse(text, name, mode)
        self.report(result.diagnostics, name, diagnostics_to)
        if not result.ok:
            raise CommandFailed(EXIT_PARSE)
        return result.policy

    def load_policy(self, args):
        from common.exceptions import SchemaViolation
        from compiler.xmlgen import decode_xml

        text, name = self.read_source(args.file)
        if getattr(args, 'from_xml', False):
            try:
                return decode_xml(text, args.mode)
            except SchemaViolation as exc:
                raise CommandFailed(EXIT_PARSE, f'{name}: {exc}')
        return self.parse_text(text, name, args.mode)

    def compile_policy(self, policy, mode, name):
        from common.exceptions import InvalidPolicy
        from compiler.xmlgen import compile_xml

        try:
            return compile_xml(policy, mode)
        except InvalidPolicy as exc:
            self.report(exc.diagnostics, name)
            raise CommandFailed(EXIT_INVALID)

    def validate_policy(self, policy, mode, name):
        from validation.validator import validate

        report = validate(policy, mode)
        self.report(report.diagnostics, name, self.stdout)
        return EXIT_OK if report.is_clean else EXIT_INVALID

    # Subcommands

    def cmd_parse(self, args):
        from language.serializers import policy_to_data

        text, name = self.read_source(args.file)
        policy = self.parse_text(text, name, args.mode)
        if args.json:
            self.out(json.dumps(policy_to_data(policy), indent=2))
            return EXIT_OK
        rules = 0
        for block in policy.blocks:
            self.out(f'user-agent {block.agents}')
            for path in block.paths:
                self.out(f'  path {path.path} ({path.file_type})')
                for element in path.elements:
                    self.out(f'    element {element.name}: {len(element.rules)} rule(s)')
                    rules += len(element.rules)
        self.out(f'{len(policy.blocks)} user-agent block(s), {rules} rule(s)')
        return EXIT_OK

    def cmd_validate(self, args):
        text, name = self.read_source(args.file)
        policy = self.parse_text(text, name, args.mode, diagnostics_to=self.stdout)
        return self.validate_policy(policy, args.mode, name)

    def cmd_compile(self, args):
        text, name = self.read_source(args.file)
        policy = self.parse_text(text, name, args.mode)
        doc = self.compile_policy(policy, args.mode, name)
        if args.output and args.output != '-':
            try:
                with open(args.output, 'w', encoding='utf-8', newline='') as fh:
                    fh.write(doc.text)
            except OSError as exc:
                raise CommandFailed(EXIT_IO, f'cannot write {args.output}: {exc}')
        else:
            self.stdout.write(doc.text)
        return EXIT_OK

    def cmd_format(self, args):
        from language.parser import pretty_print

        text, name = self.read_source(args.file)
        self.stdout.write(pretty_print(self.parse_text(text, name, args.mode)))
        return EXIT_OK

    def _action(self, token, mode):
        from common.exceptions import UnknownAction
        from language.models import ExtensionAction, Mode, action_from_string

        try:
            return action_from_string(token)
        except UnknownAction:
            if Mode(mode) is Mode.STRICT:
                raise UsageError(f'unknown action {token!r}')
        try:
            return ExtensionAction(token)
        except ValueError as exc:
            raise UsageError(f'query: {exc}')

    def cmd_query(self, args):
        from enforcement.policy import Query, applicable_rules, evaluate
        from enforcement.serializers import DecisionSerializer

        if args.all:
            policy = self.load_policy(args)
            for entry in applicable_rules(policy, args.agent):
                keyword = type(entry.rule).__name__.replace('Rule', '')
                self.out(f'{entry.path} ({entry.file_type}) {entry.element}: {keyword}: {entry.rule.actions}')
            return EXIT_OK

        missing = [flag for flag in ('path', 'element', 'action') if getattr(args, flag) is None]
        if missing:
            raise UsageError('query: missing ' + ', '.join(f'--{flag}' for flag in missing))
        action = self._action(args.action, args.mode)
        try:
            query = Query(args.agent, args.path, args.element, action)
        except ValueError as exc:
            raise UsageError(f'query: {exc}')

        decision = evaluate(self.load_policy(args), query)
        if args.json:
            self.out(json.dumps(DecisionSerializer(decision).data))
            return EXIT_OK
        self.out(decision.kind.value)
        for tag, text in decision.guidelines.items():
            self.out(f'  [{tag}] {text}')
        for rule in decision.trace.deciding_rules:
            if rule.span is not None:
                self.out(f'  decided by line {rule.span.line}')
        return EXIT_OK

    def cmd_prompt(self, args):
        from enforcement.promptgen import PromptRequest, render_prompt
        from language.models import LanguageTag

        try:
            request = PromptRequest(args.agent, LanguageTag(args.lang), not args.no_fallback, args.explain)
        except ValueError as exc:
            raise UsageError(f'prompt: {exc}')
        self.out(render_prompt(self.load_policy(args), request))
        return EXIT_OK

    def cmd_fetch(self, args):
        from .fetch import OutcomeKind, fetch

        try:
            outcome = fetch(args.origin)
        except ValueError as exc:
            raise UsageError(f'fetch: {exc}')

        if outcome.kind in (OutcomeKind.TRANSPORT_ERROR, OutcomeKind.TOO_LARGE):
            raise CommandFailed(EXIT_IO, f'{outcome.url}: {outcome.detail}')
        if outcome.kind is OutcomeKind.NO_POLICY:
            self.err(f'{outcome.url}: no policy ({outcome.detail}); treating it as empty')
            text = ''
        else:
            text = outcome.text

        if not (args.compile or args.validate):
            self.stdout.write(text)
            return EXIT_OK
        policy = self.parse_text(text, outcome.url, args.mode)
        if args.validate:
            return self.validate_policy(policy, args.mode, outcome.url)
        self.stdout.write(self.compile_policy(policy, args.mode, outcome.url).text)
        return EXIT_OK


def _mode_flags(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--strict', dest='mode', action='store_const', const='strict', help='Reject unknown actions and malformed tags (default).')
    group.add_argument('--lenient', dest='mode', action='store_const', const='lenient', help='Keep unknown actions as extensions and downgrade some errors to warnings.')
    parser.set_defaults(mode='strict')


def build_parser():
    parser = _ArgumentParser(prog='aitxt', description='Parse, validate, compile and enforce ai.txt policies.')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

    cmd = commands.add_parser('parse', help='Parse a document and print an outline of its tree.')
    cmd.add_argument('file', metavar='FILE', help="ai.txt file, or '-' for standard input")
    cmd.add_argument('--json', action='store_true', help='Print the tree as JSON.')
    _mode_flags(cmd)

    cmd = commands.add_parser('validate', help='Parse and run the semantic checks.')
    cmd.add_argument('file', metavar='FILE')
    _mode_flags(cmd)

    cmd = commands.add_parser('compile', help='Compile a document to XML.')
    cmd.add_argument('file', metavar='FILE')
    cmd.add_argument('-o', '--output', metavar='OUT', help='Write the XML here instead of standard output.')
    _mode_flags(cmd)

    cmd = commands.add_parser('format', help='Print the canonical form of a document.')
    cmd.add_argument('file', metavar='FILE')
    _mode_flags(cmd)

    cmd = commands.add_parser('query', help='Decide whether an agent may perform an action.')
    cmd.add_argument('file', metavar='FILE')
    cmd.add_argument('--agent', required=True)
    cmd.add_argument('--path')
    cmd.add_argument('--element')
    cmd.add_argument('--action')
    cmd.add_argument('--json', action='store_true', help='Print the decision as JSON.')
    cmd.add_argument('--all', action='store_true', help='List every rule that applies to the agent.')
    cmd.add_argument('--from-xml', action='store_true', help='FILE is XML produced by the compile command.')
    _mode_flags(cmd)

    cmd = commands.add_parser('prompt', help='Render prompt instructions for an agent.')
    cmd.add_argument('file', metavar='FILE')
    cmd.add_argument('--agent', required=True)
    cmd.add_argument('--lang', required=True, help='Preferred guideline language, e.g. en-US.')
    cmd.add_argument('--no-fallback', action='store_true', help='Do not fall back to another language.')
    cmd.add_argument('--explain', action='store_true', help='Append the meaning of each mentioned action.')
    cmd.add_argument('--from-xml', action='store_true', help='FILE is XML produced by the compile command.')
    _mode_flags(cmd)

    cmd = commands.add_parser('fetch', help="Download a site's /ai.txt.")
    cmd.add_argument('origin', metavar='ORIGIN', help='Site origin, e.g. https://example.com')
    action = cmd.add_mutually_exclusive_group()
    action.add_argument('--compile', action='store_true', help='Compile the fetched policy to XML.')
    action.add_argument('--validate', action='store_true', help='Validate the fetched policy.')
    _mode_flags(cmd)

    return parser


def main(argv=None, *, stdin=None, stdout=None, stderr=None):
    """Run one command and return its exit code; never raises."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    runner = _Runner(stdin, stdout, stderr)
    try:
        with redirect_stdout(stdout), redirect_stderr(stderr):
            args = build_parser().parse_args(argv)
        _setup_django()
        return getattr(runner, f'cmd_{args.command}')(args)
    except SystemExit as exc:
        # --help and --version exit through argparse
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        runner.err(str(exc))
        return EXIT_USAGE
    except CommandFailed as exc:
        if str(exc):
            runner.err(str(exc))
        return exc.code
    except Exception:
        logger.exception('aitxt failed unexpectedly')
        runner.err('aitxt: internal error')
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
