"""Backend request validation, the extractive baseline, and the HTTP client."""

import pytest

from slotsum.backends import (
    TASK_SLOT,
    TASK_TEMPLATE,
    BackendRequest,
    BackendResponse,
    ExtractiveBaseline,
    RemoteBackend,
    default_backend,
    split_sentences,
)
from slotsum.errors import (
    BackendError,
    BackendProtocolError,
    BackendStatusError,
    BackendTimeoutError,
)
from slotsum.types import Config

from stub_server import StubServer


def slot_request(entity, docs, key):
    return BackendRequest(
        task=TASK_SLOT,
        entity_name=entity,
        documents=tuple(docs),
        slot_key=key,
        serialized_input=f"[CLS] {entity} {key} [SEP] " + "\n".join(docs) + " [SEP]",
    )


def template_request(entity, docs):
    return BackendRequest(
        task=TASK_TEMPLATE,
        entity_name=entity,
        documents=tuple(docs),
        slot_key=None,
        serialized_input=f"[CLS] {entity} [SEP] " + "\n".join(docs) + " [SEP]",
    )


class TestRequestValidation:
    def test_slot_task_requires_key(self):
        with pytest.raises(ValueError):
            BackendRequest(TASK_SLOT, "e", ("d",), None, "q")

    def test_template_task_forbids_key(self):
        with pytest.raises(ValueError):
            BackendRequest(TASK_TEMPLATE, "e", ("d",), "name", "q")

    def test_unknown_task_rejected(self):
        with pytest.raises(ValueError):
            BackendRequest("translate", "e", ("d",), None, "q")

    def test_response_rejects_negative_latency(self):
        with pytest.raises(ValueError):
            BackendResponse("out", -1.0, "id")


def test_split_sentences():
    assert split_sentences("a b . c d ! e ?") == ["a b .", "c d !", "e ?"]
    assert split_sentences("no terminator") == ["no terminator"]
    assert split_sentences("") == []


class TestExtractiveBaseline:
    backend = ExtractiveBaseline()

    def test_date_slot_picks_digit_window(self):
        docs = ["peter wichers was born on 5 june 1979 in gothenburg ."]
        response = self.backend.generate(
            slot_request("peter wichers", docs, "birth_date")
        )
        assert response.output == "5 june 1979"
        assert response.backend_id == "builtin-extractive"

    def test_empty_documents_give_empty_output(self):
        response = self.backend.generate(slot_request("peter wichers", [""], "name"))
        assert response.output == ""

    def test_no_lexical_overlap_gives_empty_output(self):
        docs = ["completely unrelated text here ."]
        response = self.backend.generate(slot_request("zzz qqq", docs, "vvv"))
        assert response.output == ""

    def test_name_slot_extracts_content_run(self):
        docs = ["peter wichers is a swedish guitarist ."]
        response = self.backend.generate(slot_request("peter wichers", docs, "name"))
        assert response.output == "peter wichers"

    def test_template_task_splices_name_slot(self):
        docs = ["peter wichers is a swedish guitarist ."]
        response = self.backend.generate(template_request("peter wichers", docs))
        assert response.output == "[SLT] name [/SLT] is a swedish guitarist ."

    def test_template_task_requires_documents(self):
        with pytest.raises(BackendError):
            self.backend.generate(template_request("e", [" "]))

    def test_template_without_entity_mention_left_unchanged(self):
        docs = ["peter wichers plays guitar . some unrelated trailing text ."]
        response = self.backend.generate(template_request("unrelated text", docs))
        assert "[SLT]" not in response.output

    def test_generate_is_pure(self):
        docs = ["peter wichers was born on 5 june 1979 ."]
        request = slot_request("peter wichers", docs, "birth_date")
        first = self.backend.generate(request)
        second = self.backend.generate(request)
        assert first.output == second.output

    def test_multiple_sentences_selects_best_overlap(self):
        docs = [
            "the weather was mild in spring . eva novak composed three operas ."
        ]
        response = self.backend.generate(slot_request("eva novak", docs, "name"))
        # Overlap selects the second sentence; the run keeps at most 5 tokens.
        assert response.output == "eva novak composed three operas"


class TestRemoteBackend:
    def test_successful_round_trip(self):
        table = {("slot", "ann", "name"): "ann lee"}
        with StubServer(table) as server:
            backend = RemoteBackend(server.url)
            response = backend.generate(slot_request("ann", ["doc"], "name"))
            assert response.output == "ann lee"
            # The response reports the server's identity, not the client's.
            assert response.backend_id == "stub-server"
            assert backend.backend_id == f"remote:{server.url}"
            assert response.latency_ms >= 0.0
            assert server.request_count == 1

    def test_template_task_sends_null_slot_key(self):
        table = {("template", "ann", ""): "[SLT] name [/SLT] sings ."}
        with StubServer(table) as server:
            backend = RemoteBackend(server.url)
            response = backend.generate(template_request("ann", ["doc"]))
            assert response.output == "[SLT] name [/SLT] sings ."

    def test_persistent_503_exhausts_retries(self):
        with StubServer({}) as server:
            backend = RemoteBackend(server.url, retries=3, backoff=0.01)
            with pytest.raises(BackendStatusError) as err:
                backend.generate(slot_request("trigger-503", ["d"], "name"))
            assert err.value.status == 503
            assert server.request_count == 3

    def test_transient_503_then_success(self):
        table = {("slot", "ann", "name"): "ann lee"}
        with StubServer(table, fail_first=1) as server:
            backend = RemoteBackend(server.url, retries=3, backoff=0.01)
            response = backend.generate(slot_request("ann", ["d"], "name"))
            assert response.output == "ann lee"
            assert server.request_count == 2

    def test_400_fails_immediately_without_retry(self):
        with StubServer({}) as server:
            backend = RemoteBackend(server.url, retries=3, backoff=0.01)
            with pytest.raises(BackendStatusError) as err:
                backend.generate(slot_request("trigger-400", ["d"], "name"))
            assert err.value.status == 400
            assert server.request_count == 1

    def test_missing_fields_raise_protocol_error(self):
        with StubServer({}) as server:
            backend = RemoteBackend(server.url)
            with pytest.raises(BackendProtocolError):
                backend.generate(slot_request("trigger-malformed", ["d"], "name"))
            assert server.request_count == 1

    def test_non_json_body_raises_protocol_error(self):
        with StubServer({}) as server:
            backend = RemoteBackend(server.url)
            with pytest.raises(BackendProtocolError):
                backend.generate(slot_request("trigger-not-json", ["d"], "name"))

    def test_unreachable_host_times_out_after_retries(self):
        backend = RemoteBackend(
            "http://127.0.0.1:1", timeout=0.2, retries=2, backoff=0.01
        )
        with pytest.raises(BackendTimeoutError):
            backend.generate(slot_request("ann", ["d"], "name"))

    def test_retries_must_be_positive(self):
        with pytest.raises(ValueError):
            RemoteBackend("http://x", retries=0)


class TestDefaultBackend:
    def test_resolves_from_config(self):
        backend = default_backend(Config(delta=0.9, span_window_slack=1))
        assert isinstance(backend, ExtractiveBaseline)
        assert backend.delta == 0.9
        assert backend.slack == 1
