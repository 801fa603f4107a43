"""Chat-completion backend for diagnosis over HTTP."""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

import httpx

from .dataset import assemble_user_message, build_system_prompt
from .diagnoser import parse_diagnosis
from .model import Diagnosis, ExperimentSnapshot, FaultDiagError

log = logging.getLogger(__name__)

RETRYABLE_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class EndpointError(FaultDiagError):
    def __init__(self, status: Optional[int], message: str = ""):
        super().__init__(f"endpoint error (status {status}): {message}".rstrip(": "))
        self.status = status


class RemoteTimeout(EndpointError):
    def __init__(self, message: str = "request timed out"):
        super().__init__(None, message)


@dataclass(frozen=True)
class EndpointConfig:
    url: str = "http://127.0.0.1:8000/v1/chat/completions"
    model: str = "fault-diagnoser"
    api_key_env: str = "FIVEGDIAG_API_KEY"
    auth_header: str = "Authorization"
    temperature: float = 0.0
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_s: float = 1.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.max_attempts < 1 or self.max_in_flight < 1:
            raise ValueError("max_attempts and max_in_flight must be at least 1")

    def headers(self) -> dict[str, str]:
        key = os.environ.get(self.api_key_env)
        if not key:
            return {}
        value = f"Bearer {key}" if self.auth_header.lower() == "authorization" else key
        return {self.auth_header: value}


def build_request(s: ExperimentSnapshot, cfg: EndpointConfig) -> dict:
    return {
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [
            {"role": "system", "content": build_system_prompt()},
            {"role": "user", "content": assemble_user_message(s)},
        ],
    }


def _completion_text(resp: httpx.Response) -> str:
    try:
        return resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        raise EndpointError(200, "response has no choices[0].message.content") from None


class RemoteDiagnoser:
    """Reusable client; safe to call from several threads, bounded by ``max_in_flight``."""

    def __init__(self, cfg: EndpointConfig, client: Optional[httpx.Client] = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.cfg = cfg
        self._client = client or httpx.Client(timeout=cfg.timeout_s)
        self._owned = client is None
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)

    def close(self):
        if self._owned:
            self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def complete(self, payload: dict) -> str:
        cfg = self.cfg
        last: EndpointError = EndpointError(None, "no attempt made")
        for attempt in range(cfg.max_attempts):
            if attempt:
                self._sleep(cfg.backoff_s * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._client.post(cfg.url, json=payload, headers=cfg.headers(),
                                             timeout=cfg.timeout_s)
            except httpx.TimeoutException as exc:
                last = RemoteTimeout(str(exc) or "request timed out")
            except httpx.TransportError as exc:
                last = EndpointError(None, str(exc))
            else:
                if resp.status_code == 200:
                    return _completion_text(resp)
                last = EndpointError(resp.status_code, resp.text[:200])
                if resp.status_code not in RETRYABLE_STATUS:
                    raise last
            log.warning("attempt %d/%d failed: %s", attempt + 1, cfg.max_attempts, last)
        raise last

    def diagnose(self, s: ExperimentSnapshot) -> Diagnosis:
        return parse_diagnosis(self.complete(build_request(s, self.cfg)))


def diagnose_remote(s: ExperimentSnapshot, endpoint: EndpointConfig,
                    client: Optional[httpx.Client] = None,
                    sleep: Callable[[float], None] = time.sleep) -> Diagnosis:
    with RemoteDiagnoser(endpoint, client, sleep) as rd:
        return rd.diagnose(s)
