import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx
import pytest

from fivegdiag.diagnoser import diagnose_rule_based
from fivegdiag.model import FaultType, Pod
from fivegdiag.remote import (EndpointConfig, EndpointError, RemoteDiagnoser, RemoteTimeout,
                              build_request, diagnose_remote)

URL = "http://mock.test/v1/chat/completions"


def _reply(text, status=200):
    return httpx.Response(status, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def _cfg(**kw):
    return EndpointConfig(url=URL, backoff_s=0.5, **kw)


def test_request_shape(small_campaign):
    snap = small_campaign[0]
    req = build_request(snap, _cfg(model="m1"))
    assert req["model"] == "m1" and req["temperature"] == 0.0
    assert [m["role"] for m in req["messages"]] == ["system", "user"]


def test_pod_kill_answer(small_campaign):
    seen = []

    def handler(request):
        seen.append(json.loads(request.content))
        return _reply("Yes, pod kill, oai-smf restarted")

    d = diagnose_remote(small_campaign[0], _cfg(), _client(handler), sleep=lambda s: None)
    assert d.fault is FaultType.POD_KILL and d.component is Pod.SMF
    assert len(seen) == 1


def test_server_errors_are_retried_then_raised(small_campaign):
    calls, sleeps = [], []

    def handler(request):
        calls.append(1)
        return httpx.Response(500, text="boom")

    with pytest.raises(EndpointError) as err:
        diagnose_remote(small_campaign[0], _cfg(), _client(handler), sleep=sleeps.append)
    assert err.value.status == 500
    assert len(calls) == 3 and sleeps == [0.5, 1.0]


def test_recovers_after_transient_error(small_campaign):
    statuses = iter([503, 429, 200])

    def handler(request):
        code = next(statuses)
        return _reply("No fault detected") if code == 200 else httpx.Response(code)

    d = diagnose_remote(small_campaign[0], _cfg(), _client(handler), sleep=lambda s: None)
    assert not d.detected


@pytest.mark.parametrize("status", [400, 401, 404])
def test_client_errors_fail_fast(small_campaign, status):
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(status)

    with pytest.raises(EndpointError) as err:
        diagnose_remote(small_campaign[0], _cfg(), _client(handler), sleep=lambda s: None)
    assert err.value.status == status and len(calls) == 1


def test_timeouts(small_campaign):
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    with pytest.raises(RemoteTimeout):
        diagnose_remote(small_campaign[0], _cfg(max_attempts=2), _client(handler), sleep=lambda s: None)


def test_malformed_body(small_campaign):
    with pytest.raises(EndpointError):
        diagnose_remote(small_campaign[0], _cfg(), _client(lambda r: httpx.Response(200, text="<html>")),
                        sleep=lambda s: None)


def test_api_key_from_environment(monkeypatch, small_campaign):
    headers = []

    def handler(request):
        headers.append(request.headers.get("authorization"))
        return _reply("No fault detected")

    monkeypatch.delenv("FIVEGDIAG_API_KEY", raising=False)
    diagnose_remote(small_campaign[0], _cfg(), _client(handler))
    monkeypatch.setenv("FIVEGDIAG_API_KEY", "sekret")
    diagnose_remote(small_campaign[0], _cfg(), _client(handler))
    assert headers == [None, "Bearer sekret"]
    assert _cfg(auth_header="api-key").headers() == {"api-key": "sekret"}


def test_config_validation():
    with pytest.raises(ValueError):
        EndpointConfig(max_attempts=0)


class _RulesHandler(BaseHTTPRequestHandler):
    answers: dict = {}

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        text = self.answers[body["messages"][1]["content"]]
        data = json.dumps({"choices": [{"message": {"content": text}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def test_loopback_server_agrees_with_rules(small_campaign):
    answers = {build_request(s, EndpointConfig())["messages"][1]["content"]: diagnose_rule_based(s).raw_text
               for s in small_campaign}
    handler = type("H", (_RulesHandler,), {"answers": answers})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        cfg = EndpointConfig(url=f"http://127.0.0.1:{server.server_port}/v1/chat/completions",
                             timeout_s=10)
        with RemoteDiagnoser(cfg) as rd:
            for s in small_campaign:
                assert rd.diagnose(s) == diagnose_rule_based(s)
    finally:
        server.shutdown()
        server.server_close()
