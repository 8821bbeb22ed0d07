from rest_framework import serializers

from .models import WILDCARD, GuideRule, Mode


class DiagnosticSerializer(serializers.Serializer):
    """
    Read-only shape of one parse or validation finding.

    Fields:
    - severity: "error" or "warning".
    - code: Stable code such as P003 or V008.
    - message: Human readable explanation.
    - line, column: 1-based position of the finding.
    """
    severity = serializers.CharField(source='severity.value')
    code = serializers.CharField()
    message = serializers.CharField()
    line = serializers.IntegerField(source='span.line')
    column = serializers.IntegerField(source='span.column')


class PolicySourceSerializer(serializers.Serializer):
    """
    Input for every endpoint that takes ai.txt text.

    Fields:
    - source: The ai.txt document.
    - source_name: Name used in formatted diagnostics (optional).
    - mode: "strict" (default) or "lenient".
    """
    source = serializers.CharField(trim_whitespace=False, allow_blank=True)
    source_name = serializers.CharField(required=False, default='<request>')
    mode = serializers.ChoiceField(choices=[m.value for m in Mode], default=Mode.STRICT.value)


def _actions(actions):
    if actions.is_all:
        return WILDCARD
    return [str(a) for a in actions.actions]


def policy_to_data(policy):
    """Plain-data view of a PolicyFile, used by the API and `parse --json`."""
    blocks = []
    for block in policy.blocks:
        paths = []
        for path in block.paths:
            elements = []
            for element in path.elements:
                rules = []
                for rule in element.rules:
                    if isinstance(rule, GuideRule):
                        rules.append({
                            'kind': 'guide',
                            'actions': _actions(rule.actions),
                            'guidelines': [{'lang': g.language.raw, 'text': g.text} for g in rule.guidelines],
                        })
                    else:
                        rules.append({'kind': 'disallow', 'actions': _actions(rule.actions)})
                elements.append({'name': element.name, 'rules': rules})
            paths.append({'path': path.path, 'file_type': path.file_type.value, 'elements': elements})
        blocks.append({
            'agents': WILDCARD if block.agents.is_all else list(block.agents.names),
            'paths': paths,
        })
    return {'blocks': blocks}


class ParseResultSerializer(serializers.Serializer):
    policy = serializers.SerializerMethodField()
    diagnostics = DiagnosticSerializer(many=True)

    def get_policy(self, obj):
        return policy_to_data(obj.policy)
