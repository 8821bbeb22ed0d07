"""
HTTP retrieval of a site's ai.txt.

The file lives at the root of the origin, like robots.txt. Transport
problems come back as FetchOutcome values rather than exceptions so that
callers decide how to treat an unreachable policy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urlsplit, urlunsplit

import requests
from django.conf import settings

logger = logging.getLogger(__name__)

POLICY_PATH = '/ai.txt'
NO_POLICY_STATUSES = (404, 410)
CHUNK_SIZE = 8192


class OutcomeKind(str, Enum):
    FOUND = 'found'
    NO_POLICY = 'no-policy'
    TRANSPORT_ERROR = 'transport-error'
    TOO_LARGE = 'too-large'


@dataclass(frozen=True)
class FetchOutcome:
    kind: OutcomeKind
    text: str | None = None
    detail: str = ''
    url: str = ''

    def __post_init__(self):
        if (self.kind is OutcomeKind.FOUND) != (self.text is not None):
            raise ValueError('only a found outcome carries text')

    @property
    def found(self) -> bool:
        return self.kind is OutcomeKind.FOUND


def policy_url(origin: str) -> str:
    """Return `<scheme>://<authority>/ai.txt`; path, query and fragment are dropped."""
    parts = urlsplit(origin)
    if parts.scheme not in ('http', 'https') or not parts.netloc:
        raise ValueError(f'origin {origin!r} must be an http or https URL with a host')
    return urlunsplit((parts.scheme, parts.netloc, POLICY_PATH, '', ''))


def _read_capped(response: requests.Response, max_bytes: int) -> bytes | None:
    declared = response.headers.get('Content-Length')
    if declared and declared.isdigit() and int(declared) > max_bytes:
        return None
    body = bytearray()
    for chunk in response.iter_content(chunk_size=CHUNK_SIZE):
        body.extend(chunk)
        if len(body) > max_bytes:
            return None
    return bytes(body)


def fetch(origin, *, timeout=None, max_bytes=None, max_redirects=None, session=None) -> FetchOutcome:
    """
    GET the origin's /ai.txt.

    200 gives FOUND with the body decoded as UTF-8, 404 and 410 give NO_POLICY,
    bodies over `max_bytes` give TOO_LARGE, and every other status or network
    failure gives TRANSPORT_ERROR. Defaults come from the AITXT_* settings.
    """
    timeout = settings.AITXT_FETCH_TIMEOUT if timeout is None else timeout
    max_bytes = settings.AITXT_MAX_BODY_BYTES if max_bytes is None else max_bytes
    max_redirects = settings.AITXT_MAX_REDIRECTS if max_redirects is None else max_redirects

    url = policy_url(origin)
    http = session or requests.Session()
    http.max_redirects = max_redirects
    logger.info('fetching %s', url)
    try:
        with http.get(
            url,
            timeout=timeout,
            stream=True,
            allow_redirects=True,
            headers={'User-Agent': settings.AITXT_USER_AGENT},
        ) as response:
            if response.status_code in NO_POLICY_STATUSES:
                logger.info('%s: no policy (HTTP %d)', url, response.status_code)
                return FetchOutcome(OutcomeKind.NO_POLICY, detail=f'HTTP {response.status_code}', url=url)
            if response.status_code != 200:
                logger.warning('%s: HTTP %d', url, response.status_code)
                return FetchOutcome(OutcomeKind.TRANSPORT_ERROR, detail=f'HTTP {response.status_code}', url=url)
            body = _read_capped(response, max_bytes)
    except requests.TooManyRedirects:
        logger.warning('%s: more than %d redirects', url, max_redirects)
        return FetchOutcome(OutcomeKind.TRANSPORT_ERROR, detail=f'more than {max_redirects} redirects', url=url)
    except requests.RequestException as exc:
        logger.warning('%s: %s', url, exc)
        return FetchOutcome(OutcomeKind.TRANSPORT_ERROR, detail=str(exc), url=url)
    finally:
        if session is None:
            http.close()

    if body is None:
        logger.warning('%s: body exceeds %d bytes', url, max_bytes)
        return FetchOutcome(OutcomeKind.TOO_LARGE, detail=f'body exceeds {max_bytes} bytes', url=url)
    try:
        text = body.decode('utf-8-sig')
    except UnicodeDecodeError as exc:
        logger.warning('%s: body is not UTF-8', url)
        return FetchOutcome(OutcomeKind.TRANSPORT_ERROR, detail=f'body is not valid UTF-8: {exc}', url=url)
    return FetchOutcome(OutcomeKind.FOUND, text=text, url=url)
