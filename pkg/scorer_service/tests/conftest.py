"""Session-wide tiny model and a live service instance on a local port."""

from __future__ import annotations

import threading
import time

import pytest
import uvicorn

from scorer_service.app import create_app
from scorer_service.config import ServiceConfig
from scorer_service.model import MlmScorer
from scorer_service.testing import build_tiny_model


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    return build_tiny_model(tmp_path_factory.mktemp("tiny-model"), seed=0)


@pytest.fixture(scope="session")
def scorer(tiny_model_dir):
    return MlmScorer(ServiceConfig(model=tiny_model_dir, max_tokens=64))


@pytest.fixture(scope="session")
def service_url(scorer):
    """Real HTTP server (uvicorn in a thread) for wire-level tests."""
    config = uvicorn.Config(create_app(scorer), host="127.0.0.1", port=0,
                            log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 30
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


def probe_sentences(n: int = 50):
    """Deterministic sentences over the tiny model's vocabulary."""
    subjects = ["the waiter", "the waitress", "a king", "a queen", "he", "she",
                "the actor", "the actress", "the father", "the mother"]
    verbs = ["came over", "left", "runs", "sits", "sings", "works", "sleeps"]
    tails = ["now", "then", "here", "there", "with the song", "by the river"]
    sentences = []
    i = 0
    while len(sentences) < n:
        s = f"{subjects[i % len(subjects)]} {verbs[i % len(verbs)]} {tails[i % len(tails)]}."
        sentences.append(s)
        i += 1
    return sentences
