from drf_yasg.utils import swagger_auto_schema
from rest_framework.decorators import api_view
from rest_framework.response import Response

from common.exceptions import PolicyRejected

from .parser import parse
from .serializers import ParseResultSerializer, PolicySourceSerializer


def parse_request_source(data):
    """Parse validated request data; raise PolicyRejected (400) on parse errors."""
    result = parse(data['source'], data['source_name'], data['mode'])
    if not result.ok:
        raise PolicyRejected(result.diagnostics, 'Policy text has parse errors.')
    return result


@swagger_auto_schema(
    method='post',
    operation_summary="Parse an ai.txt document",
    operation_description="Parse ai.txt text and return its tree together with any warnings. "
                          "Parse errors are returned with status 400.",
    request_body=PolicySourceSerializer,
    responses={200: ParseResultSerializer(), 400: 'Field errors or parse diagnostics'},
)
@api_view(['POST'])
def parse_policy(request):
    serializer = PolicySourceSerializer(data=request.data)
    serializer.is_valid(raise_exception=True)
    result = parse_request_source(serializer.validated_data)
    return Response(ParseResultSerializer(result).data)
