from rest_framework import serializers

from common.exceptions import UnknownAction
from language.models import AGENT_NAME_RE, ExtensionAction, LanguageTag, Mode, action_from_string
from language.serializers import PolicySourceSerializer


class QuerySerializer(PolicySourceSerializer):
    """
    Input for a single rule check.

    Fields:
    - agent: Agent name (letters, digits, underscores).
    - path: Resource path starting with '/'.
    - element: Element name exactly as it appears in the policy.
    - action: One of the curated actions; lenient mode also accepts other tokens.
    """
    agent = serializers.RegexField('^' + AGENT_NAME_RE.pattern + r'\Z')
    path = serializers.CharField()
    element = serializers.CharField()
    action = serializers.CharField()

    def validate_path(self, value):
        if not value.startswith('/'):
            raise serializers.ValidationError("Path must begin with '/'.")
        return value

    def validate(self, attrs):
        token = attrs['action']
        try:
            attrs['action'] = action_from_string(token)
        except UnknownAction:
            if attrs['mode'] == Mode.STRICT.value:
                raise serializers.ValidationError({'action': [f'Unknown action {token!r}.']})
            try:
                attrs['action'] = ExtensionAction(token)
            except ValueError as exc:
                raise serializers.ValidationError({'action': [str(exc)]})
        return attrs


class PromptInputSerializer(PolicySourceSerializer):
    """
    Fields:
    - agent: Agent whose rules are rendered.
    - lang: Preferred guideline language, e.g. en-US.
    - fallback: Use a guide's first guideline when the preferred language is missing.
    - explain: Append plain-language meanings of the mentioned actions.
    """
    agent = serializers.RegexField('^' + AGENT_NAME_RE.pattern + r'\Z')
    lang = serializers.CharField()
    fallback = serializers.BooleanField(default=True)
    explain = serializers.BooleanField(default=False)

    def validate_lang(self, value):
        try:
            return LanguageTag(value)
        except ValueError:
            raise serializers.ValidationError('Language tag must be a single token such as en-US.')


class TraceEntrySerializer(serializers.Serializer):
    role = serializers.CharField()
    line = serializers.IntegerField(allow_null=True)
    column = serializers.IntegerField(allow_null=True)


def trace_entries(trace):
    return [
        {
            'role': role,
            'line': node.span.line if node.span else None,
            'column': node.span.column if node.span else None,
        }
        for role, node in trace.entries()
    ]


class DecisionSerializer(serializers.Serializer):
    """
    Stable JSON shape of a Decision:
    {"decision": "disallowed" | "guided" | "allowed",
     "guidelines": {"en-US": "..."},
     "trace": [{"role": "rule", "line": 5, "column": 7}, ...]}
    """
    decision = serializers.CharField(source='kind.value')
    guidelines = serializers.SerializerMethodField()
    trace = serializers.SerializerMethodField()

    def get_guidelines(self, obj):
        return {tag.raw: text for tag, text in obj.guidelines.items()}

    def get_trace(self, obj):
        return TraceEntrySerializer(trace_entries(obj.trace), many=True).data


class PromptSerializer(serializers.Serializer):
    prompt = serializers.CharField()
