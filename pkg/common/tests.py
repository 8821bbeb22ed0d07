from rest_framework import status
from rest_framework.test import APISimpleTestCase

from common.exceptions import PolicyRejected, SchemaViolation
from language.parser import parse


class DocumentationTests(APISimpleTestCase):

    def test_base_url_redirects_to_swagger(self):
        response = self.client.get('/')
        self.assertRedirects(response, '/swagger/', fetch_redirect_response=False)

    def test_schema_lists_every_endpoint(self):
        response = self.client.get('/swagger.json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        paths = response.json()['paths']
        for endpoint in ('parse', 'validate', 'compile', 'query', 'prompt'):
            with self.subTest(endpoint=endpoint):
                self.assertIn('post', paths[f'/api/{endpoint}/'])


class ExceptionTests(APISimpleTestCase):

    def test_policy_rejected_keeps_integer_positions(self):
        result = parse('User-agent: GPT Bot!\n  Path: / html\n    Element: p\n      Disallow: *\n')
        exc = PolicyRejected(result.errors, 'nope')
        self.assertEqual(exc.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(exc.detail['detail'], 'nope')
        self.assertEqual(exc.detail['diagnostics'][0]['line'], 1)
        self.assertIsInstance(exc.detail['diagnostics'][0]['column'], int)

    def test_schema_violation_message(self):
        exc = SchemaViolation('/ai-txt/user-agent[1]', 'missing path')
        self.assertEqual(str(exc), '/ai-txt/user-agent[1]: missing path')
        self.assertEqual(exc.reason, 'missing path')
