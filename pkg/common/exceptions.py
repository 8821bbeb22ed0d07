from rest_framework import status
from rest_framework.exceptions import APIException


class AiTxtError(Exception):
    """Base class for every error raised by the ai.txt toolchain."""


class UnknownAction(AiTxtError, ValueError):
    """
    Raised when a token is not one of the curated action names.

    The offending token is kept on `token` so callers can echo it back.
    """
    def __init__(self, token):
        self.token = token
        super().__init__(f"unknown action {token!r}")


class InvalidPolicy(AiTxtError):
    """
    Raised when an operation refuses a policy that still carries
    Error-severity diagnostics (for example XML compilation).
    """
    def __init__(self, diagnostics, message="policy has blocking diagnostics"):
        self.diagnostics = tuple(diagnostics)
        super().__init__(f"{message} ({len(self.diagnostics)} error(s))")


class SchemaViolation(AiTxtError):
    """
    Raised when an XML document does not follow the canonical ai-txt schema.

    `location` is a slash separated path into the document, e.g.
    `/ai-txt/user-agent[2]/path[1]`.
    """
    def __init__(self, location, message):
        self.location = location
        self.reason = message
        super().__init__(f"{location}: {message}")


class PolicyRejected(APIException):
    """
    HTTP 400 raised by the API when submitted policy text cannot be used.
    The response body lists the diagnostics that caused the rejection.
    """
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = 'Policy text has errors.'
    default_code = 'policy_rejected'

    def __init__(self, diagnostics, detail=None):
        # language.models imports this module, so the serializer import stays local
        from language.serializers import DiagnosticSerializer

        super().__init__(detail=detail or self.default_detail, code=self.default_code)
        # Assigned after init: APIException would coerce line/column ints to strings.
        self.detail = {
            'detail': str(self.detail),
            'diagnostics': DiagnosticSerializer(diagnostics, many=True).data,
        }
