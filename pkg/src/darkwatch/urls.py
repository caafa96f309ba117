"""URL canonicalization used everywhere a URL is stored or deduplicated.

One URL, one spelling: lowercase scheme/host, default ports dropped,
dot-segments resolved, query keys sorted bytewise, fragment stripped.
``.onion`` hosts pass through untouched apart from lowercasing.
"""

from __future__ import annotations

from urllib.parse import urlsplit

from .errors import InvalidUrlError

_DEFAULT_PORTS = {"http": 80, "https": 443}


def _remove_dot_segments(path: str) -> str:
    segments = path.split("/")
    out: list[str] = []
    last = len(segments) - 1
    for i, seg in enumerate(segments):
        if seg == ".":
            if i == last:
                out.append("")
            continue
        if seg == "..":
            if len(out) > 1:
                out.pop()
            if i == last:
                out.append("")
            continue
        out.append(seg)
    return "/".join(out)


def _sort_query(query: str) -> str:
    parts = [p for p in query.split("&") if p]
    parts.sort(key=lambda p: (p.split("=", 1)[0].encode(), p.encode()))
    return "&".join(parts)


def normalize_url(raw: str) -> str:
    """Return the canonical form of an absolute http/https URL.

    Raises InvalidUrlError for relative URLs, unsupported schemes, or
    anything urlsplit cannot digest.
    """
    try:
        parts = urlsplit(raw)
    except ValueError as exc:
        raise InvalidUrlError(f"unparseable URL: {raw!r}") from exc

    scheme = parts.scheme.lower()
    if scheme not in _DEFAULT_PORTS:
        raise InvalidUrlError(f"unsupported scheme in {raw!r}")
    if not parts.hostname:
        raise InvalidUrlError(f"missing host in {raw!r}")

    host = parts.hostname.lower()
    try:
        port = parts.port
    except ValueError as exc:
        raise InvalidUrlError(f"bad port in {raw!r}") from exc

    netloc = host
    if parts.username:
        auth = parts.username
        if parts.password is not None:
            auth += f":{parts.password}"
        netloc = f"{auth}@{netloc}"
    if port is not None and port != _DEFAULT_PORTS[scheme]:
        netloc = f"{netloc}:{port}"

    path = _remove_dot_segments(parts.path) or "/"
    query = _sort_query(parts.query)

    url = f"{scheme}://{netloc}{path}"
    if query:
        url += f"?{query}"
    return url


def host_of(url: str) -> str:
    return urlsplit(url).hostname or ""


def registrable_domain(host: str) -> str:
    """Approximate registrable domain: last two labels.

    No public-suffix list; onion hosts and bare/short hosts are returned
    whole. Good enough for crawl scoping at desk scale.
    """
    if host.endswith(".onion"):
        return host
    parts = host.split(".")
    if len(parts) <= 2:
        return host
    return ".".join(parts[-2:])
