import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlmbias.errors import (
    BackendConnectionError,
    BackendRequestError,
    EmbeddingError,
    FixtureError,
    MalformedResponseError,
    UnknownQueryError,
)
from mlmbias.scoring import (
    CachingBackend,
    RemoteBackend,
    TableBackend,
    TokenScore,
    compute_aula,
    cosine_similarity,
)
from mlmbias.scoring.table import dump_fixture

from conftest import FixtureBuilder


class TestTokenScore:
    def test_positive_log_prob_rejected(self):
        with pytest.raises(ValueError):
            TokenScore("x", 0.5, 1.0)

    def test_negative_attention_rejected(self):
        with pytest.raises(ValueError):
            TokenScore("x", -1.0, -0.1)


class TestAula:
    def test_single_token(self):
        backend = FixtureBuilder().scores("word", [-2.0], [1.0]).backend()
        assert compute_aula(backend, "word").aula == -2.0

    def test_uniform(self):
        backend = FixtureBuilder().scores(
            "a b c d", [-1.0] * 4, [1.0] * 4).backend()
        assert compute_aula(backend, "a b c d").aula == -1.0

    def test_weighted_two_tokens(self):
        # (0.5 * -1.0 + 1.5 * -3.0) / 2 = -2.5
        backend = FixtureBuilder().scores(
            "a b", [-1.0, -3.0], [0.5, 1.5]).backend()
        assert abs(compute_aula(backend, "a b").aula - (-2.5)) < 1e-12

    def test_arithmetic_invariant(self):
        backend = FixtureBuilder().scores(
            "x y z", [-0.25, -1.5, -4.0], [0.1, 2.0, 0.7]).backend()
        scored = compute_aula(backend, "x y z")
        assert abs(scored.aula - scored.recompute_aula()) < 1e-9

    @given(st.lists(st.tuples(
        st.floats(min_value=-50, max_value=0),
        st.floats(min_value=0, max_value=10)), min_size=1, max_size=20),
        st.floats(min_value=0.1, max_value=10))
    def test_linearity_under_scaling(self, pairs, scale):
        texts = " ".join(f"t{i}" for i in range(len(pairs)))
        log_probs = [lp for lp, _ in pairs]
        attentions = [at for _, at in pairs]
        base = FixtureBuilder().scores(texts, log_probs, attentions).backend()
        scaled = FixtureBuilder().scores(
            texts, [lp * scale for lp in log_probs], attentions).backend()
        a = compute_aula(base, texts).aula
        b = compute_aula(scaled, texts).aula
        assert abs(b - a * scale) <= 1e-9 * max(1.0, abs(b))

    @given(st.permutations(list(range(6))))
    def test_order_invariance(self, order):
        log_probs = [-0.1, -2.0, -3.7, -0.01, -9.0, -1.1]
        attentions = [0.5, 1.5, 0.0, 2.0, 0.25, 1.0]
        text_a = "a b c d e f"
        backend_a = FixtureBuilder().scores(text_a, log_probs, attentions).backend()
        backend_b = FixtureBuilder().scores(
            text_a,
            [log_probs[i] for i in order],
            [attentions[i] for i in order]).backend()
        assert abs(compute_aula(backend_a, text_a).aula
                   - compute_aula(backend_b, text_a).aula) < 1e-9


class TestCosine:
    def test_identical(self):
        assert cosine_similarity([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_reference_value(self):
        value = cosine_similarity([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        assert abs(value - 0.974631846) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(EmbeddingError):
            cosine_similarity([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_zero_vector(self):
        with pytest.raises(EmbeddingError):
            cosine_similarity([0.0, 0.0], [1.0, 2.0])

    _grid = st.integers(min_value=-50, max_value=50).map(lambda i: i / 10.0)

    @given(st.lists(_grid, min_size=2, max_size=8), st.lists(_grid, min_size=2, max_size=8))
    def test_symmetry(self, a, b):
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        if not any(a) or not any(b):
            return
        assert cosine_similarity(a, b) == cosine_similarity(b, a)

    @given(st.lists(_grid, min_size=2, max_size=8),
           st.floats(min_value=0.01, max_value=100))
    def test_scale_invariance(self, a, c):
        if not any(a):
            return
        scaled = [c * x for x in a]
        assert abs(cosine_similarity(a, scaled) - 1.0) < 1e-9


class TestTableBackend:
    def _fixture(self):
        return (FixtureBuilder()
                .scores("first one", [-1.0, -2.0], [1.0, 0.5])
                .scores("second one", [-0.5, -0.25], [1.0, 1.0])
                .embed("first one", [1.0, 0.0])
                .embed("second one", [0.5, 0.5])
                .mask("the [MASK] one", 1, [("he", 0.4), ("she", 0.3)]))

    def test_known_sentences_scorable(self):
        backend = self._fixture().backend()
        assert len(backend.token_scores("first one")) == 2
        assert len(backend.token_scores("second one")) == 2

    def test_unknown_sentence_errors(self):
        backend = self._fixture().backend()
        with pytest.raises(UnknownQueryError):
            backend.token_scores("third one")
        with pytest.raises(UnknownQueryError):
            backend.embed("third one")
        with pytest.raises(UnknownQueryError):
            backend.fill_mask("third [MASK]", 1, 5)

    def test_prob_above_one_rejected_at_load(self):
        builder = FixtureBuilder().mask("a [MASK]", 1, [("he", 1.3)])
        with pytest.raises(FixtureError):
            builder.backend()

    def test_unsorted_predictions_rejected(self):
        builder = FixtureBuilder().mask("a [MASK]", 1, [("he", 0.2), ("she", 0.4)])
        with pytest.raises(FixtureError):
            builder.backend()

    def test_positive_log_prob_rejected_at_load(self):
        builder = FixtureBuilder().scores("bad", [0.5], [1.0])
        with pytest.raises(FixtureError):
            builder.backend()

    def test_unequal_lengths_rejected(self):
        builder = FixtureBuilder()
        builder.data["token_scores"]["bad"] = {
            "tokens": ["a"], "log_probs": [-1.0, -2.0], "attentions": [1.0]}
        with pytest.raises(FixtureError):
            builder.backend()

    def test_top_k_truncates(self):
        backend = self._fixture().backend()
        assert len(backend.fill_mask("the [MASK] one", 1, 1)) == 1
        assert len(backend.fill_mask("the [MASK] one", 1, 10)) == 2

    def test_golden_round_trip(self, tmp_path):
        path = tmp_path / "fixture.json"
        dump_fixture(self._fixture().data, path)
        first = TableBackend.load(path)
        dump_fixture(first.to_data(), tmp_path / "again.json")
        second = TableBackend.load(tmp_path / "again.json")
        for text in ("first one", "second one"):
            assert first.token_scores(text) == second.token_scores(text)
            assert np.array_equal(first.embed(text), second.embed(text))
        assert first.fill_mask("the [MASK] one", 1, 5) == second.fill_mask(
            "the [MASK] one", 1, 5)

    def test_embedding_dim_in_info(self):
        assert self._fixture().backend().info().embedding_dim == 2


class TestCachingBackend:
    def test_caches_and_matches_inner(self):
        inner = self._counting_backend()
        cached = CachingBackend(inner)
        first = cached.token_scores("first one")
        second = cached.token_scores("first one")
        assert first == second
        assert inner.calls["first one"] == 1

    def _counting_backend(self):
        base = (FixtureBuilder()
                .scores("first one", [-1.0, -2.0], [1.0, 0.5])
                .backend())

        class Counting(type(base).__bases__[0]):  # ScorerBackend
            def __init__(self):
                self.calls = {}

            def token_scores(self, text):
                self.calls[text] = self.calls.get(text, 0) + 1
                return base.token_scores(text)

            def fill_mask(self, text, mask_index, top_k):
                return base.fill_mask(text, mask_index, top_k)

            def embed(self, text):
                return base.embed(text)

            def info(self):
                return base.info()

        return Counting()


class TestRemoteBackend:
    def _backend(self):
        return (FixtureBuilder()
                .scores("hello there", [-1.0, -2.0], [1.0, 1.0])
                .embed("hello there", [0.25, 0.75, 0.5])
                .mask("a [MASK] there", 1, [("he", 0.5), ("she", 0.25)])
                .info(model_id="stub-model", max_tokens=64, embedding_dim=3)
                .backend())

    def test_round_trip(self, stub_server_factory):
        server = stub_server_factory(self._backend())
        remote = RemoteBackend.connect(server.url, backoff_base=0.01)
        info = remote.info()
        assert info.model_id == "stub-model"
        assert info.max_tokens == 64
        scores = remote.token_scores("hello there")
        assert [s.log_prob for s in scores] == [-1.0, -2.0]
        preds = remote.fill_mask("a [MASK] there", 1, 5)
        assert [(p.token, p.prob) for p in preds] == [("he", 0.5), ("she", 0.25)]
        vec = remote.embed("hello there")
        assert vec.tolist() == [0.25, 0.75, 0.5]
        remote.close()

    def test_unknown_query_maps_to_request_error(self, stub_server_factory):
        server = stub_server_factory(self._backend())
        remote = RemoteBackend.connect(server.url, backoff_base=0.01)
        with pytest.raises(BackendRequestError) as err:
            remote.token_scores("never seen")
        assert err.value.status == 400
        remote.close()

    def test_transient_500_retried(self, stub_server_factory):
        server = stub_server_factory(self._backend())
        remote = RemoteBackend.connect(server.url, max_retries=2, backoff_base=0.01)
        server.state.fail_next = 2
        scores = remote.token_scores("hello there")
        assert len(scores) == 2
        remote.close()

    def test_persistent_500_gives_up(self, stub_server_factory):
        server = stub_server_factory(self._backend())
        remote = RemoteBackend.connect(server.url, max_retries=1, backoff_base=0.01)
        server.state.fail_next = 10
        with pytest.raises(BackendRequestError) as err:
            remote.token_scores("hello there")
        assert err.value.status == 500
        remote.close()

    def test_malformed_response(self, stub_server_factory):
        server = stub_server_factory(self._backend())
        remote = RemoteBackend.connect(server.url, backoff_base=0.01)
        server.state.malformed_next = 1
        with pytest.raises(MalformedResponseError) as err:
            remote.embed("hello there")
        assert "/v1/embed" in str(err.value)
        remote.close()

    def test_unreachable_endpoint(self):
        with pytest.raises(BackendConnectionError):
            RemoteBackend.connect(
                "http://127.0.0.1:1", timeout=0.5, max_retries=0, backoff_base=0.01)

    def test_identical_results_to_table(self, stub_server_factory):
        table = self._backend()
        server = stub_server_factory(table)
        remote = RemoteBackend.connect(server.url, backoff_base=0.01)
        a = compute_aula(table, "hello there")
        b = compute_aula(remote, "hello there")
        assert a.aula == b.aula
        assert a.token_scores == b.token_scores
        remote.close()

    def test_metric_interchangeability_against_stub(self, stub_server_factory):
        """Same fixture behind the wire and in-process must produce the
        same downstream metric value exactly."""
        from mlmbias.lexicon import Gender
        from mlmbias.metrics import compute_sbm
        from mlmbias.pairgen import Origin, SentencePair
        from mlmbias.corpus import SentenceRecord

        builder = FixtureBuilder()
        for i in range(6):
            builder.scores(f"m {i}", [-1.0 - 0.3 * i, -0.5])
            builder.scores(f"f {i}", [-2.0 + 0.4 * i, -0.5])
        table = builder.backend()
        pairs = [
            SentencePair(
                id=i,
                male=SentenceRecord.from_text(i, f"m {i}"),
                female=SentenceRecord.from_text(i, f"f {i}"),
                pivot=0, origin=Origin.LEXICON, male_word="m", female_word="f",
                source_gender=Gender.MALE)
            for i in range(6)
        ]
        server = stub_server_factory(table)
        remote = RemoteBackend.connect(server.url, backoff_base=0.01)
        assert compute_sbm(pairs, remote).value == compute_sbm(pairs, table).value
        remote.close()
