import threading
from pathlib import Path

import pytest

from ddugm_server.server import AnalyticBackend, ScoreServer

GOLDEN_DIR = Path(__file__).parent / "golden"

ANALYTIC_MEAN = 0.25
ANALYTIC_TAU = 0.5


@pytest.fixture
def analytic_server():
    """A running analytic-mode server on an ephemeral port."""
    server = ScoreServer(("127.0.0.1", 0), AnalyticBackend(ANALYTIC_MEAN, ANALYTIC_TAU), "image")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()
