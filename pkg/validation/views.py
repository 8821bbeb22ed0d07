from drf_yasg.utils import swagger_auto_schema
from rest_framework import serializers
from rest_framework.decorators import api_view
from rest_framework.response import Response

from language.serializers import DiagnosticSerializer, PolicySourceSerializer
from language.views import parse_request_source

from .validator import validate


class ValidationReportSerializer(serializers.Serializer):
    """
    Fields:
    - is_clean: True when no Error-severity diagnostic was produced.
    - diagnostics: Parse warnings followed by validation findings.
    """
    is_clean = serializers.BooleanField()
    diagnostics = DiagnosticSerializer(many=True)


@swagger_auto_schema(
    method='post',
    operation_summary="Validate an ai.txt document",
    operation_description="Parse the document, then run the semantic checks (V001-V010). "
                          "Parse errors are returned with status 400.",
    request_body=PolicySourceSerializer,
    responses={200: ValidationReportSerializer(), 400: 'Field errors or parse diagnostics'},
)
@api_view(['POST'])
def validate_policy(request):
    serializer = PolicySourceSerializer(data=request.data)
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data
    result = parse_request_source(data)
    report = validate(result.policy, data['mode'])
    return Response(ValidationReportSerializer({
        'is_clean': report.is_clean,
        'diagnostics': result.diagnostics + report.diagnostics,
    }).data)
