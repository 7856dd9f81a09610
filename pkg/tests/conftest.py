"""Shared builders: lexicons, sentence records, table fixtures, and a
stub HTTP scorer for remote-backend tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import List, Sequence, Tuple

import pytest

from mlmbias.corpus import SentenceRecord
from mlmbias.errors import UnknownQueryError
from mlmbias.lexicon import (
    AgreementRule,
    AgreementScope,
    GenderLexicon,
    GenderPair,
    MatchMode,
)
from mlmbias.scoring import TableBackend


def make_lexicon(pairs: Sequence[Tuple[str, str]],
                 rules: Sequence[Tuple[str, str, int]] = (),
                 mode: MatchMode = MatchMode.TOKEN,
                 language: str = "en") -> GenderLexicon:
    return GenderLexicon(
        language=language,
        entries=tuple(GenderPair(m, f) for m, f in pairs),
        agreement_rules=tuple(
            AgreementRule(m, f, AgreementScope.ARTICLE, w) for m, f, w in rules),
        match_mode=mode,
    )


def write_lexicon(path, pairs: Sequence[Tuple[str, str]],
                  rules: Sequence[Tuple[str, str, str, int]] = (),
                  lang: str = "en", match: str = "token") -> None:
    lines = [f"lang={lang}", f"match={match}"]
    lines += [f"{m}\t{f}" for m, f in pairs]
    if rules:
        lines.append("#agreement")
        lines += [f"{m}\t{f}\t{scope}\t{w}" for m, f, scope, w in rules]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def rec(text: str, id: int = 0, language: str = "en") -> SentenceRecord:
    return SentenceRecord.from_text(id, text, language)


class FixtureBuilder:
    """Assemble a table-backend fixture dict piece by piece."""

    def __init__(self):
        self.data = {"token_scores": {}, "fill_mask": [], "embed": {}}

    def scores(self, text: str, log_probs: Sequence[float],
               attentions: Sequence[float] | None = None,
               tokens: Sequence[str] | None = None) -> "FixtureBuilder":
        if tokens is None:
            tokens = text.split()
        if attentions is None:
            attentions = [1.0] * len(log_probs)
        assert len(tokens) == len(log_probs) == len(attentions)
        self.data["token_scores"][text] = {
            "tokens": list(tokens),
            "log_probs": list(log_probs),
            "attentions": list(attentions),
        }
        return self

    def embed(self, text: str, vector: Sequence[float]) -> "FixtureBuilder":
        self.data["embed"][text] = list(vector)
        return self

    def mask(self, text: str, mask_index: int,
             predictions: Sequence[Tuple[str, float]]) -> "FixtureBuilder":
        self.data["fill_mask"].append({
            "text": text,
            "mask_index": mask_index,
            "predictions": [{"token": t, "prob": p} for t, p in predictions],
        })
        return self

    def info(self, **kwargs) -> "FixtureBuilder":
        self.data["info"] = kwargs
        return self

    def backend(self, source: str = "<test>") -> TableBackend:
        return TableBackend(self.data, source=source)


class _StubState:
    def __init__(self, backend: TableBackend):
        self.backend = backend
        self.fail_next = 0        # serve this many 500s before answering
        self.malformed_next = 0   # serve this many non-JSON bodies
        self.requests: List[str] = []
        self.lock = threading.Lock()


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):  # keep pytest output clean
        pass

    @property
    def state(self) -> _StubState:
        return self.server.state

    def _send(self, code: int, obj) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_raw(self, code: int, body: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _faults(self) -> bool:
        with self.state.lock:
            self.state.requests.append(self.path)
            if self.state.fail_next > 0:
                self.state.fail_next -= 1
                self._send(500, {"error": "transient"})
                return True
            if self.state.malformed_next > 0:
                self.state.malformed_next -= 1
                self._send_raw(200, b"this is not json {{")
                return True
        return False

    def do_GET(self):
        if self._faults():
            return
        if self.path == "/v1/info":
            info = self.state.backend.info()
            self._send(200, {
                "model_id": info.model_id,
                "max_tokens": info.max_tokens,
                "embedding_dim": info.embedding_dim,
            })
        else:
            self._send(404, {"error": f"no such path {self.path}"})

    def do_POST(self):
        if self._faults():
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            body = json.loads(self.rfile.read(length))
        except json.JSONDecodeError:
            self._send(400, {"error": "malformed body"})
            return
        backend = self.state.backend
        try:
            if self.path == "/v1/token_scores":
                scores = backend.token_scores(body["text"])
                self._send(200, {
                    "tokens": [s.token for s in scores],
                    "log_probs": [s.log_prob for s in scores],
                    "attentions": [s.attention for s in scores],
                })
            elif self.path == "/v1/fill_mask":
                preds = backend.fill_mask(body["text"], body["mask_index"], body["top_k"])
                self._send(200, {
                    "predictions": [{"token": p.token, "prob": p.prob} for p in preds],
                })
            elif self.path == "/v1/embed":
                self._send(200, {"vector": backend.embed(body["text"]).tolist()})
            else:
                self._send(404, {"error": f"no such path {self.path}"})
        except UnknownQueryError as exc:
            self._send(400, {"error": str(exc)})
        except KeyError as exc:
            self._send(400, {"error": f"missing field {exc}"})


class StubServer:
    """Threaded HTTP scorer serving a table fixture, with fault knobs."""

    def __init__(self, backend: TableBackend):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self.httpd.state = _StubState(backend)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def state(self) -> _StubState:
        return self.httpd.state

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def __enter__(self) -> "StubServer":
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()
        self.thread.join(timeout=5)


def token_diff_positions(a: SentenceRecord, b: SentenceRecord):
    assert len(a.tokens) == len(b.tokens), (a.text, b.text)
    return [i for i, (x, y) in enumerate(zip(a.tokens, b.tokens)) if x.text != y.text]


def assert_minimal_pair_diff(pair, lexicon: GenderLexicon) -> None:
    """Token-level diff check: a generated pair may differ from its
    counterpart only at the pivot and at agreement-rule positions within
    their windows."""
    from mlmbias.lexicon import casefold

    positions = token_diff_positions(pair.male, pair.female)
    assert pair.pivot in positions, (pair.male.text, pair.female.text, pair.pivot)
    for i in positions:
        if i == pair.pivot:
            continue
        allowed = any(
            abs(i - pair.pivot) <= rule.window
            and casefold(pair.male.tokens[i].text) == casefold(rule.dependent_male)
            and casefold(pair.female.tokens[i].text) == casefold(rule.dependent_female)
            for rule in lexicon.agreement_rules
        )
        assert allowed, (
            f"position {i} differs outside pivot/agreement: "
            f"{pair.male.text!r} vs {pair.female.text!r}")


def build_coverage_corpus(translated: int, translated_gendered: int,
                          absent: int = 50, neutral: int = 100):
    """Synthetic parallel corpus realizing exact coverage counts:
    `translated` gendered source sentences with a translation (of which
    `translated_gendered` contain a target gender word), `absent`
    gendered sources without a translation, `neutral` non-gendered."""
    from mlmbias.corpus import ParallelPair

    en_lexicon = make_lexicon([("he", "she")], language="en")
    tgt_lexicon = make_lexicon([("mann", "frau")], language="de")
    pairs = []
    next_id = 0

    def add(src: str, tgt: str | None):
        nonlocal next_id
        source = SentenceRecord.from_text(next_id, src, "en")
        target = SentenceRecord.from_text(next_id, tgt, "de") if tgt else None
        pairs.append(ParallelPair(source, target))
        next_id += 1

    for i in range(translated):
        tgt = f"der mann arbeitet {i}" if i < translated_gendered else f"der tisch steht {i}"
        add(f"he works {i}", tgt)
    for i in range(absent):
        add(f"she sleeps {i}", None)
    for i in range(neutral):
        add(f"it rains {i}", f"es regnet {i}")
    return pairs, en_lexicon, tgt_lexicon


@pytest.fixture
def stub_server_factory():
    servers: List[StubServer] = []

    def start(backend: TableBackend) -> StubServer:
        server = StubServer(backend)
        server.thread.start()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.httpd.shutdown()
        server.httpd.server_close()
        server.thread.join(timeout=5)
