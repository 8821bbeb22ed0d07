from django.http import HttpResponse
from drf_yasg.utils import swagger_auto_schema
from rest_framework.decorators import api_view

from common.exceptions import InvalidPolicy, PolicyRejected
from language.serializers import PolicySourceSerializer
from language.views import parse_request_source

from .xmlgen import compile_xml


@swagger_auto_schema(
    method='post',
    operation_summary="Compile an ai.txt document to XML",
    operation_description="Return the canonical XML form of a policy. Policies with parse or "
                          "validation errors are refused with status 400.",
    request_body=PolicySourceSerializer,
    responses={200: 'application/xml document', 400: 'Field errors or blocking diagnostics'},
)
@api_view(['POST'])
def compile_policy(request):
    serializer = PolicySourceSerializer(data=request.data)
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data
    policy = parse_request_source(data).policy
    try:
        doc = compile_xml(policy, data['mode'])
    except InvalidPolicy as exc:
        raise PolicyRejected(exc.diagnostics, 'Policy failed validation.')
    return HttpResponse(doc.text, content_type='application/xml; charset=utf-8')
