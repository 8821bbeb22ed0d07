from drf_yasg.utils import swagger_auto_schema
from rest_framework.decorators import api_view
from rest_framework.response import Response

from language.views import parse_request_source

from .policy import Query, evaluate
from .promptgen import PromptRequest, render_prompt
from .serializers import DecisionSerializer, PromptInputSerializer, PromptSerializer, QuerySerializer


@swagger_auto_schema(
    method='post',
    operation_summary="Check one action against a policy",
    operation_description="Evaluate whether an agent may perform an action on an element of a path. "
                          "Returns the decision, any guidelines and the rules that produced it.",
    request_body=QuerySerializer,
    responses={200: DecisionSerializer(), 400: 'Field errors or parse diagnostics'},
)
@api_view(['POST'])
def query_policy(request):
    serializer = QuerySerializer(data=request.data)
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data
    policy = parse_request_source(data).policy
    decision = evaluate(policy, Query(data['agent'], data['path'], data['element'], data['action']))
    return Response(DecisionSerializer(decision).data)


@swagger_auto_schema(
    method='post',
    operation_summary="Render prompt instructions for an agent",
    operation_description="Render the rules that apply to the agent as plain instruction text "
                          "for inclusion in its prompt.",
    request_body=PromptInputSerializer,
    responses={200: PromptSerializer(), 400: 'Field errors or parse diagnostics'},
)
@api_view(['POST'])
def prompt_policy(request):
    serializer = PromptInputSerializer(data=request.data)
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data
    policy = parse_request_source(data).policy
    prompt = render_prompt(policy, PromptRequest(data['agent'], data['lang'], data['fallback'], data['explain']))
    return Response(PromptSerializer({'prompt': prompt}).data)
