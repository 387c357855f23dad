import json
import sys
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from voiceroute.command import CommandVocabulary, DeviceCommand, parse_model_output
from voiceroute.inference import (
    BackendId,
    InferenceResult,
    OfflineProcessBackend,
    OnlineBackend,
    TemplateBackend,
    build_prompt,
    infer,
    template_infer,
)


class TestBuildPrompt:
    def test_vocabulary_echo(self, vocab):
        b = build_prompt("turn on light one", vocab)
        assert "turn_on" in b.system_text and "light" in b.system_text
        assert b.user_text == "turn on light one"

    def test_same_system_text_for_any_transcript(self, vocab):
        a, b = build_prompt("hello there", vocab), build_prompt("turn on light one", vocab)
        assert a.system_text == b.system_text and a.user_text == "hello there"

    def test_lists_exactly_the_vocab(self):
        vocab = CommandVocabulary(actions=("turn_on", "turn_off"), devices={"fan": 3})
        text = build_prompt("x", vocab).system_text
        assert "fan" in text and "light" not in text and "speaker" not in text
        assert "[]" in text and '"index"' in text

    @pytest.mark.parametrize("t", ["", "   "])
    def test_empty_rejected(self, vocab, t):
        with pytest.raises(ValueError):
            build_prompt(t, vocab)


class TestTemplate:
    def test_missing_index(self, vocab):
        assert json.loads(template_infer("turn on the light", vocab)) == [
            {"action": "turn_on", "device": "light", "index": None}
        ]

    def test_compound(self, vocab):
        out = json.loads(template_infer("turn on light one and turn off speaker two", vocab))
        assert out == [
            {"action": "turn_on", "device": "light", "index": 1},
            {"action": "turn_off", "device": "speaker", "index": 2},
        ]

    def test_irrelevant(self, vocab):
        assert template_infer("what is the weather", vocab) == "[]"

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("Switch OFF light 2.", {"action": "turn_off", "device": "light", "index": 2}),
            ("turn on light ten", {"action": "turn_on", "device": "light", "index": 10}),
            ("turn on light eleven", {"action": "turn_on", "device": "light", "index": None}),
            ("turn off light too", {"action": "turn_off", "device": "light", "index": None}),
            ("turn off the lights", {"action": "turn_off", "device": "light", "index": None}),
            ("turn on the oven", {"action": "turn_on", "device": "oven", "index": None}),
        ],
    )
    def test_rules(self, vocab, text, expected):
        assert json.loads(template_infer(text, vocab)) == [expected]

    def test_homophone_action_is_not_matched(self, vocab):
        assert template_infer("turn of light one", vocab) == "[]"

    def test_multiword_device(self):
        vocab = CommandVocabulary(devices={"smart_plug": 2})
        assert json.loads(template_infer("turn on smart plug two", vocab)) == [
            {"action": "turn_on", "device": "smart_plug", "index": 2}
        ]


words = st.sampled_from(
    ["turn", "switch", "on", "off", "the", "light", "lights", "speaker", "one", "two", "7", "and", "oven", "please", "of"]
)


@given(st.lists(words, max_size=15))
def test_template_output_always_parses(tokens):
    raw = template_infer(" ".join(tokens), CommandVocabulary())
    assert isinstance(json.loads(raw), list)
    cmds = parse_model_output(raw)
    assert all(isinstance(c, DeviceCommand) for c in cmds)


def test_template_backend_result(vocab):
    r = infer(TemplateBackend(), build_prompt("turn on light one", vocab), 1000)
    assert r.succeeded and r.backend_id is BackendId.TEMPLATE
    assert json.loads(r.raw_output) == [{"action": "turn_on", "device": "light", "index": 1}]


class TestOnline:
    def test_pass_through(self, stub_server, vocab):
        canned = '[{"action":"turn_on","device":"light","index":1}]'
        stub_server.reply(canned)
        backend = OnlineBackend(stub_server.url, model_name="gpt-3.5-turbo", api_key_env="VR_TEST_KEY")
        r = infer(backend, build_prompt("turn on light one", vocab), 5000)
        assert r.succeeded and r.raw_output == canned and r.backend_id is BackendId.ONLINE
        assert r.model_name == "gpt-3.5-turbo" and r.latency_ms >= 0

    def test_request_shape(self, stub_server, vocab, monkeypatch):
        monkeypatch.setenv("VR_TEST_KEY", "sk-test")
        backend = OnlineBackend(stub_server.url, model_name="my-model", api_key_env="VR_TEST_KEY")
        infer(backend, build_prompt("turn off speaker one", vocab), 5000)
        (req,) = stub_server.requests
        assert req["path"] == "/v1/chat/completions"
        assert req["json"]["model"] == "my-model"
        users = [m for m in req["json"]["messages"] if m["role"] == "user"]
        assert users == [{"role": "user", "content": "turn off speaker one"}]
        assert req["headers"]["Authorization"] == "Bearer sk-test"

    def test_http_error(self, stub_server, vocab):
        stub_server.status = 500
        r = infer(OnlineBackend(stub_server.url), build_prompt("x", vocab), 5000)
        assert not r.succeeded and r.raw_output == "" and r.failure_reason == "HTTP 500"

    def test_malformed_body(self, stub_server, vocab):
        stub_server.body = {"nope": True}
        r = infer(OnlineBackend(stub_server.url), build_prompt("x", vocab), 5000)
        assert not r.succeeded and "malformed" in r.failure_reason

    def test_timeout_bounded(self, stub_server, vocab):
        stub_server.delay_s = 3.0
        start = time.perf_counter()
        r = infer(OnlineBackend(stub_server.url), build_prompt("x", vocab), 300)
        assert time.perf_counter() - start < 0.3 + 1.0
        assert not r.succeeded and "timeout" in r.failure_reason

    def test_unreachable(self, vocab):
        r = infer(OnlineBackend("http://127.0.0.1:9/v1"), build_prompt("x", vocab), 500)
        assert not r.succeeded and r.failure_reason


def py(code):
    return OfflineProcessBackend(sys.executable, ["-c", code])


class TestOffline:
    def test_stdin_to_stdout(self, vocab):
        echo_user = (
            "import sys, json; text = sys.stdin.read(); "
            "print(json.dumps([{'action': 'turn_on', 'device': 'light', 'index': 1}]) if 'light one' in text else '[]')"
        )
        r = infer(py(echo_user), build_prompt("turn on light one", vocab), 10_000)
        assert r.succeeded and r.backend_id is BackendId.OFFLINE
        assert parse_model_output(r.raw_output) == [DeviceCommand("turn_on", "light", 1)]

    def test_nonzero_exit(self, vocab):
        r = infer(py("import sys; sys.exit(1)"), build_prompt("x", vocab), 10_000)
        assert not r.succeeded and r.failure_reason == "process exited 1"

    def test_hang_is_bounded(self, vocab):
        start = time.perf_counter()
        r = infer(py("import time; time.sleep(30)"), build_prompt("x", vocab), 300)
        assert time.perf_counter() - start < 0.3 + 1.0
        assert not r.succeeded and "timed out" in r.failure_reason

    def test_missing_executable(self, vocab):
        r = infer(OfflineProcessBackend("/nonexistent/llm"), build_prompt("x", vocab), 1000)
        assert not r.succeeded and "could not start" in r.failure_reason


def test_failed_result_invariant():
    with pytest.raises(ValueError):
        InferenceResult(BackendId.ONLINE, "text", 1.0, "m", succeeded=False, failure_reason="x")
    with pytest.raises(ValueError):
        InferenceResult(BackendId.ONLINE, "", 1.0, "m", succeeded=False)
