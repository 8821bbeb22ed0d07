"""
URLconf for the stub site the fetch tests run against.

The response for /ai.txt is picked by the STUB_AI_TXT_SCENARIO setting so a
single LiveServerTestCase can exercise every outcome.
"""
import time

from django.conf import settings
from django.http import HttpResponse, HttpResponseRedirect
from django.urls import path

from common.testing import ARTICLE_POLICY, BAD_SELECTOR_POLICY

OVERSIZE_BYTES = 512 * 1024 + 1
SLOW_SECONDS = 1.0


def _text(body, status=200):
    return HttpResponse(body, status=status, content_type='text/plain; charset=utf-8')


def ai_txt(request):
    scenario = getattr(settings, 'STUB_AI_TXT_SCENARIO', 'found')
    if scenario == 'found':
        return _text(ARTICLE_POLICY)
    if scenario == 'missing':
        return _text('not here', status=404)
    if scenario == 'gone':
        return _text('gone', status=410)
    if scenario == 'error':
        return _text('boom', status=500)
    if scenario == 'oversize':
        return _text('#' * OVERSIZE_BYTES)
    if scenario == 'not-utf8':
        return HttpResponse(b'User-agent: \xff\xfe\n', content_type='text/plain')
    if scenario == 'redirect':
        return HttpResponseRedirect('/moved/ai.txt')
    if scenario == 'loop':
        return HttpResponseRedirect('/hop/1')
    if scenario.startswith('chain-'):
        # chain-N reaches the policy after exactly N redirects
        return HttpResponseRedirect(f'/chain/{int(scenario[len("chain-"):]) - 1}')
    if scenario == 'bom':
        return HttpResponse(b'\xef\xbb\xbf' + ARTICLE_POLICY.encode('utf-8'), content_type='text/plain; charset=utf-8')
    if scenario == 'invalid':
        return _text(BAD_SELECTOR_POLICY)
    if scenario == 'slow':
        time.sleep(SLOW_SECONDS)
        return _text(ARTICLE_POLICY)
    raise ValueError(f'unknown stub scenario {scenario!r}')


def moved(request):
    return _text(ARTICLE_POLICY)


def hop(request, n):
    return HttpResponseRedirect(f'/hop/{n + 1}')


def chain(request, remaining):
    if remaining == 0:
        return _text(ARTICLE_POLICY)
    return HttpResponseRedirect(f'/chain/{remaining - 1}')


urlpatterns = [
    path('ai.txt', ai_txt),
    path('moved/ai.txt', moved),
    path('hop/<int:n>', hop),
    path('chain/<int:remaining>', chain),
]
