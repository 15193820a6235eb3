"""Small retrying JSON-over-HTTP POST client.

Shared by the question-generation and sentence-embedding service clients.
Retries transient transport failures up to a bound, then surfaces
ServiceUnavailable; non-JSON or wrong-shape replies surface MalformedResponse.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import requests


class ServiceError(Exception):
    pass


class ServiceUnavailable(ServiceError):
    pass


class Timeout(ServiceError):
    pass


class MalformedResponse(ServiceError):
    pass


@dataclass
class JsonPostClient:
    endpoint: str
    timeout: float = 10.0
    retries: int = 3
    backoff: float = 0.2

    def post(self, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = requests.post(self.endpoint, json=payload, timeout=self.timeout)
            except requests.Timeout as exc:
                last_error = Timeout(f"{self.endpoint}: timed out after {self.timeout}s")
                last_error.__cause__ = exc
            except requests.RequestException as exc:
                last_error = ServiceUnavailable(f"{self.endpoint}: {exc}")
            else:
                if response.status_code >= 500:
                    last_error = ServiceUnavailable(
                        f"{self.endpoint}: HTTP {response.status_code}"
                    )
                elif response.status_code >= 400:
                    raise MalformedResponse(
                        f"{self.endpoint}: HTTP {response.status_code}: {response.text[:200]}"
                    )
                else:
                    try:
                        body = response.json()
                    except ValueError as exc:
                        raise MalformedResponse(f"{self.endpoint}: non-JSON reply") from exc
                    if not isinstance(body, dict):
                        raise MalformedResponse(f"{self.endpoint}: expected a JSON object")
                    return body
            if attempt + 1 < self.retries:
                time.sleep(self.backoff * (attempt + 1))
        raise last_error if last_error is not None else ServiceUnavailable(self.endpoint)
