from unittest import TestCase
from . import *
import json
import os
import httpx
from xlit.llm import *
from xlit.paths import TempDir
from xlit.types import TaskKind


URL = "http://llm.test/v1/completions"


def completion_response(text, status=200):
    return httpx.Response(status, json={"choices": [{"text": text}]})


class ScriptedTransport:
    """Returns the scripted responses in order and records the requests."""

    def __init__(self, *responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        response = self.responses.pop(0)
        if isinstance(response, Exception):
            raise response
        return response


def live_backend(transport, **kwargs):
    sleeps = []
    backend = LiveBackend(
        URL,
        client=httpx.Client(transport=httpx.MockTransport(transport)),
        sleep=sleeps.append,
        **kwargs)
    return backend, sleeps


class RequestTests(TestCase):
    def test_canonical(self):
        request = CompletionRequest("Москва", 16)
        assert '["Москва",16,0.0,["\\n\\n"]]' == request.canonical()

    def test_hash(self):
        request = CompletionRequest("prompt", 16)
        assert request.hash == request_hash(CompletionRequest("prompt", 16))
        assert 64 == len(request.hash)
        assert request.hash != CompletionRequest("prompt", 17).hash
        assert request.hash != CompletionRequest("prompt", 16, stop_sequences=()).hash
        assert request.hash != CompletionRequest("prompt ", 16).hash

    def test_validation(self):
        with self.assertRaises(ValueError):
            CompletionRequest("p", 0)
        with self.assertRaises(ValueError):
            CompletionRequest("p", 1, temperature=-0.5)

    def test_default_max_new_tokens(self):
        assert 16 == default_max_new_tokens(TaskKind.CLS)
        assert 40 == default_max_new_tokens(TaskKind.SEQLAB, 5)
        with self.assertRaises(ValueError):
            default_max_new_tokens(TaskKind.SEQLAB)

    def test_make_request(self):
        request = make_request("p", TaskKind.SEQLAB, 3)
        assert 24 == request.max_new_tokens
        assert 0.0 == request.temperature
        assert ("\n\n",) == request.stop_sequences
        assert 5 == make_request("p", TaskKind.CLS, max_new_tokens=5).max_new_tokens

    def test_concurrency_var(self):
        var = ConcurrencyVar(4)
        var.update(10)
        assert 10 == var.concurrency
        var.update(-3)
        assert 1 == var.concurrency
        var.update()
        assert 4 == var.concurrency


class LiveBackendTests(TestCase):
    def test_complete(self):
        transport = ScriptedTransport(completion_response(" B-PER"))
        backend, sleeps = live_backend(transport, model="tiny")
        with backend:
            result = backend.complete(CompletionRequest("Hello", 8))
        assert " B-PER" == result.text
        assert "live:tiny" == result.backend_id
        assert not result.from_cache
        assert [] == sleeps
        body = json.loads(transport.requests[0].content)
        assert dict(
            model="tiny", prompt="Hello", max_tokens=8, temperature=0.0, stop=["\n\n"]) == body

    def test_api_key(self):
        with patch.dict(os.environ, {API_KEY_ENV: "secret"}):
            transport = ScriptedTransport(completion_response("x"))
            backend, _ = live_backend(transport)
            backend.complete(CompletionRequest("Hello", 8))
        assert "Bearer secret" == transport.requests[0].headers["Authorization"]
        assert f"live:{URL}" == backend.backend_id

    def test_retry(self):
        transport = ScriptedTransport(
            httpx.Response(429),
            httpx.Response(503),
            httpx.ConnectError("refused"),
            completion_response("ok"),
        )
        backend, sleeps = live_backend(transport, backoff=0.5)
        assert "ok" == backend.complete(CompletionRequest("Hello", 8)).text
        self.assertListEqual([0.5, 1.0, 2.0], sleeps)

    def test_retries_exhausted(self):
        transport = ScriptedTransport(*[httpx.Response(500) for _ in range(3)])
        backend, sleeps = live_backend(transport, max_attempts=3, backoff=1.0)
        with self.assertRaisesRegex(BackendError, "after 3 attempts") as ctx:
            backend.complete(CompletionRequest("Hello", 8))
        assert 500 == ctx.exception.status
        self.assertListEqual([1.0, 2.0], sleeps)

    def test_no_retry_on_client_error(self):
        transport = ScriptedTransport(httpx.Response(401, text="unauthorized"))
        backend, sleeps = live_backend(transport)
        with self.assertRaisesRegex(BackendError, "status 401") as ctx:
            backend.complete(CompletionRequest("Hello", 8))
        assert 401 == ctx.exception.status
        assert [] == sleeps
        assert 1 == len(transport.requests)

    def test_context_length(self):
        transport = ScriptedTransport(
            httpx.Response(400, text="This model's maximum context length is 2048 tokens"))
        backend, _ = live_backend(transport)
        with self.assertRaises(PromptTooLongError):
            backend.complete(CompletionRequest("Hello", 8))

    def test_max_prompt_chars(self):
        transport = ScriptedTransport()
        backend, _ = live_backend(transport, max_prompt_chars=4)
        with self.assertRaisesRegex(PromptTooLongError, "5 characters; the limit is 4"):
            backend.complete(CompletionRequest("Hello", 8))
        assert [] == transport.requests

    def test_bad_response(self):
        transport = ScriptedTransport(httpx.Response(200, json={"choices": []}))
        backend, _ = live_backend(transport)
        with self.assertRaisesRegex(BackendError, "Unexpected response format"):
            backend.complete(CompletionRequest("Hello", 8))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            LiveBackend("not a url")
        with self.assertRaises(ValueError):
            LiveBackend(URL, max_attempts=0)


class CassetteTests(TestCase):
    def setUp(self):
        self.root = TempDir()

    def tearDown(self):
        self.root.close()

    def test_append_and_reload(self):
        path = self.root.absolute_path / "cassette.jsonl"
        cassette = Cassette(path)
        assert 0 == len(cassette)
        request = CompletionRequest("Αθήνα", 16)
        record = cassette.append(request, "travel", "live:tiny")
        assert request.hash in cassette
        assert record is cassette.append(request, "other", "live:tiny")
        assert 1 == len(path.read_text(encoding="utf-8").splitlines())
        reloaded = Cassette(path)
        assert "travel" == reloaded.get(request.hash)["text"]
        assert "Αθήνα" == reloaded.get(request.hash)["request"]["prompt"]

    def test_first_record_wins(self):
        path = self.root.make_file(
            contents='{"hash": "h", "text": "a"}\n\n{"hash": "h", "text": "b"}\n')
        assert "a" == Cassette(path).get("h")["text"]

    def test_invalid(self):
        path = self.root.make_file(contents='{"hash": "h"}\n')
        with self.assertRaisesRegex(ValueError, "record 1"):
            Cassette(path)


class ReplayBackendTests(TestCase):
    def setUp(self):
        self.root = TempDir()

    def tearDown(self):
        self.root.close()

    def test_replay(self):
        path = self.root.absolute_path / "c.jsonl"
        request = CompletionRequest("Hello", 8)
        Cassette(path).append(request, "O", "live:tiny")
        backend = ReplayBackend(path)
        result = backend.complete(request)
        assert "O" == result.text
        assert "live:tiny" == result.backend_id
        assert result.from_cache
        assert "O" == complete(backend, request).text

    def test_miss(self):
        path = self.root.make_file(contents="")
        request = CompletionRequest("Hello", 8)
        with self.assertRaises(ReplayMissError) as ctx:
            ReplayBackend(path).complete(request)
        assert request.hash == ctx.exception.request_hash
        assert request.hash in str(ctx.exception)

    def test_missing_cassette(self):
        with self.assertRaisesRegex(BackendError, "does not exist"):
            ReplayBackend(self.root.absolute_path / "missing.jsonl")


class RecordingBackendTests(TestCase):
    def test_records_then_replays(self):
        with TempDir() as temp:
            path = temp.absolute_path / "c.jsonl"
            transport = ScriptedTransport(completion_response("first"))
            live, _ = live_backend(transport, model="tiny")
            request = CompletionRequest("Hello", 8)
            with RecordingBackend(live, path) as backend:
                assert "first" == backend.complete(request).text
                cached = backend.complete(request)
            assert "first" == cached.text
            assert cached.from_cache
            assert 1 == len(transport.requests)
            assert "first" == ReplayBackend(path).complete(request).text


class OpenBackendTests(TestCase):
    def test_open_backend(self):
        with TempDir() as temp:
            path = temp.make_file(contents="")
            assert isinstance(open_backend(f"replay:{path}"), ReplayBackend)
            live = open_backend(f"live:{URL}", model="tiny")
            assert isinstance(live, LiveBackend)
            assert "tiny" == live.model
            live.close()
            recording = open_backend(f"live:{URL}", temp.absolute_path / "new.jsonl")
            assert isinstance(recording, RecordingBackend)
            recording.close()

    def test_invalid(self):
        for spec in ("replay", "replay:", "file:x.jsonl"):
            with self.assertRaises(ValueError):
                open_backend(spec)
