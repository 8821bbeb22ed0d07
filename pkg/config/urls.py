from django.urls import path, re_path
from rest_framework import permissions
from drf_yasg.views import get_schema_view
from drf_yasg import openapi

from common.views import redirect_from_base
from language.views import parse_policy
from validation.views import validate_policy
from compiler.views import compile_policy
from enforcement.views import query_policy, prompt_policy


# Schema view configuration for Swagger and Redoc API documentation
schema_view = get_schema_view(
   openapi.Info(
      title="ai.txt Toolchain API",
      default_version='v1',
      description="Parse, validate, compile and enforce ai.txt content policies.",
      license=openapi.License(name="BSD License"),
   ),
   public=True,
   permission_classes=(permissions.AllowAny,),
)

urlpatterns = [
    # Redirect root URL to the API documentation
    path('', redirect_from_base, name='redirect-from-base'),

    # Swagger/OpenAPI schema and UI endpoints
    re_path(r'^swagger(?P<format>\.json|\.yaml)$', schema_view.without_ui(cache_timeout=0), name='schema-json'),
    path('swagger/', schema_view.with_ui('swagger', cache_timeout=0), name='schema-swagger-ui'),
    path('redoc/', schema_view.with_ui('redoc', cache_timeout=0), name='schema-redoc'),

    # Toolchain endpoints
    path('api/parse/', parse_policy, name='parse'),
    path('api/validate/', validate_policy, name='validate'),
    path('api/compile/', compile_policy, name='compile'),
    path('api/query/', query_policy, name='query'),
    path('api/prompt/', prompt_policy, name='prompt'),
]
