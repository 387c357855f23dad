import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import hypothesis
import pytest

from voiceroute.command import CommandVocabulary
from voiceroute.config import Config
from voiceroute.history import HistoryStore

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def vocab():
    return CommandVocabulary()


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def history():
    return HistoryStore()


class StubServer:
    """Chat-completion stand-in that records requests and replays a canned reply."""

    def __init__(self):
        self.requests = []
        self.status = 200
        self.body = {"choices": [{"message": {"role": "assistant", "content": "[]"}}]}
        self.delay_s = 0.0
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_HEAD(self):
                self.send_response(200)
                self.end_headers()

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append({"path": self.path, "headers": dict(self.headers), "json": payload})
                if stub.delay_s:
                    threading.Event().wait(stub.delay_s)
                data = json.dumps(stub.body).encode()
                try:
                    self.send_response(stub.status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                except (BrokenPipeError, ConnectionResetError):
                    pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}/v1"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def reply(self, content):
        self.body = {"choices": [{"message": {"role": "assistant", "content": content}}]}

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()


ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and (report.when == "call" or report.failed):
        ACCEPTANCE_RESULTS.append((marker.args[0], report.passed, report.when))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, when in ACCEPTANCE_RESULTS:
        suffix = "" if when == "call" else f" (failed in {when})"
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}{suffix}")
