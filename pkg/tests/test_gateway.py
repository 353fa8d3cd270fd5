import threading

import pytest

from textkg.errors import TokenBudgetError, TransportError, UnscriptedPromptError
from textkg.gateway import (
    BackendConfig,
    ChatMessage,
    CompletionRequest,
    FixtureBackend,
    RemoteChatBackend,
    RetryPolicy,
    request_digest,
    whitespace_token_count,
    write_fixture_file,
)


def request(system="You are terse.", user="List the districts of Cagliari."):
    return CompletionRequest(
        messages=(ChatMessage("system", system), ChatMessage("user", user))
    )


class TestTokenCount:
    def test_empty_string_is_zero(self):
        assert whitespace_token_count("") == 0

    def test_single_word_at_least_one(self):
        assert whitespace_token_count("Cagliari") >= 1

    def test_fixture_sentence_exact_count(self):
        # Oracle: the sentence has exactly eleven whitespace-delimited words.
        sentence = "The old quarter keeps its watchtowers and its slow evening walks"
        assert whitespace_token_count(sentence) == 11


class TestMessageDiscipline:
    def test_bad_role_rejected(self):
        with pytest.raises(ValueError):
            ChatMessage("tool", "hello")

    def test_nonzero_temperature_rejected(self):
        with pytest.raises(ValueError):
            CompletionRequest(
                messages=(ChatMessage("system", "x"), ChatMessage("user", "y")),
                temperature=0.2,
            )

    def test_system_message_must_lead(self):
        with pytest.raises(ValueError):
            CompletionRequest(messages=(ChatMessage("user", "y"), ChatMessage("system", "x")))

    def test_exactly_one_system_message(self):
        with pytest.raises(ValueError):
            CompletionRequest(
                messages=(
                    ChatMessage("system", "x"),
                    ChatMessage("system", "x2"),
                    ChatMessage("user", "y"),
                )
            )


class TestDigest:
    def test_newline_normalization(self):
        a = [ChatMessage("system", "s"), ChatMessage("user", "line1\r\nline2")]
        b = [ChatMessage("system", "s"), ChatMessage("user", "line1\nline2")]
        assert request_digest(a) == request_digest(b)

    def test_role_matters(self):
        a = [ChatMessage("system", "s"), ChatMessage("user", "x")]
        b = [ChatMessage("system", "x"), ChatMessage("user", "s")]
        assert request_digest(a) != request_digest(b)


class TestFixtureBackend:
    def test_scripted_response_verbatim(self):
        req = request()
        backend = FixtureBackend({request_digest(req.messages): "Marina; Stampace"})
        assert backend.complete(req) == "Marina; Stampace"

    def test_determinism(self):
        req = request()
        backend = FixtureBackend({request_digest(req.messages): "same"})
        assert backend.complete(req) == backend.complete(req)
        assert backend.calls_made == 2

    def test_unscripted_prompt_is_an_error(self):
        backend = FixtureBackend({})
        with pytest.raises(UnscriptedPromptError):
            backend.complete(request())

    def test_budget_error_before_lookup(self):
        words = " ".join(["tok"] * 5000)
        backend = FixtureBackend({})
        with pytest.raises(TokenBudgetError):
            backend.complete(request(user=words))
        assert backend.calls_made == 0

    def test_prompt_plus_output_budget(self):
        req = CompletionRequest(
            messages=(ChatMessage("system", "a b c"), ChatMessage("user", "d e f")),
            max_output_tokens=4096,
        )
        with pytest.raises(TokenBudgetError):
            FixtureBackend({}).complete(req)

    def test_file_round_trip(self, tmp_path):
        req = request()
        digest = request_digest(req.messages)
        path = tmp_path / "fixture.json"
        write_fixture_file(path, {digest: "answer"}, {digest: "prompt text"})
        backend = FixtureBackend.from_file(path)
        assert backend.complete(req) == "answer"
        assert (tmp_path / "fixture.json.prompts.txt").read_text().startswith("===")

    def test_thread_safe_call_count(self):
        req = request()
        backend = FixtureBackend({request_digest(req.messages): "ok"})
        threads = [threading.Thread(target=backend.complete, args=(req,)) for _ in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert backend.calls_made == 16


class _FakeResponse:
    def __init__(self, status_code, content="done"):
        self.status_code = status_code
        self._content = content

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


class TestRemoteBackend:
    def config(self):
        return BackendConfig(
            kind="remote-chat",
            endpoint="http://localhost:9/chat",
            retry=RetryPolicy(max_attempts=3, base_backoff=0.0),
        )

    def test_retries_transient_then_succeeds(self, monkeypatch):
        import requests

        responses = [_FakeResponse(503), _FakeResponse(200, "recovered")]
        monkeypatch.setattr(requests, "post", lambda *a, **k: responses.pop(0))
        backend = RemoteChatBackend(self.config())
        assert backend.complete(request()) == "recovered"

    def test_exhaustion_raises_transport_error(self, monkeypatch):
        import requests

        monkeypatch.setattr(requests, "post", lambda *a, **k: _FakeResponse(503))
        backend = RemoteChatBackend(self.config())
        with pytest.raises(TransportError):
            backend.complete(request())

    def test_hard_failure_not_retried(self, monkeypatch):
        import requests

        calls = []

        def post(*a, **k):
            calls.append(1)
            return _FakeResponse(401)

        monkeypatch.setattr(requests, "post", post)
        backend = RemoteChatBackend(self.config())
        with pytest.raises(TransportError):
            backend.complete(request())
        assert len(calls) == 1

    def test_bearer_header_from_env(self, monkeypatch):
        import requests

        seen = {}

        def post(url, json=None, headers=None, timeout=None):
            seen.update(headers)
            return _FakeResponse(200)

        monkeypatch.setattr(requests, "post", post)
        monkeypatch.setenv("TEXTKG_API_KEY", "sk-test")
        RemoteChatBackend(self.config()).complete(request())
        assert seen["Authorization"] == "Bearer sk-test"
