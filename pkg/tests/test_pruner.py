import math
import random

import numpy as np
import pytest
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from helpers import ServerThread, oracle_embed, oracle_similarity

from kgalign.kgstore import TextTriple, ingest
from kgalign.pathfinder import PathQueryConfig, find_paths
from kgalign.pruner import (
    EmbeddingVector,
    FallbackEmbedder,
    HashedNgramEmbedder,
    ProviderError,
    RemoteEmbedder,
    cosine,
    embed,
    linearize,
    prune,
)

MAKEUP_GOLD_TRIPLES = [
    TextTriple("masking tape", "used for", "hide scar"),
    TextTriple("masking tape", "is a", "makeup"),
]


class TestLinearize:
    def test_gold_graph_renders_exactly(self):
        assert linearize(MAKEUP_GOLD_TRIPLES).text == (
            "masking tape used for hide scar, masking tape is a makeup"
        )

    def test_single_triple(self):
        assert linearize([("coffee", "related to", "cafe")]).text == "coffee related to cafe"

    def test_empty(self):
        assert linearize([]).text == ""
        assert linearize(None).text == ""

    def test_path_and_subgraph_sources(self, fixture_graph):
        paths = find_paths(
            fixture_graph,
            [fixture_graph.lookup("coffee")],
            [fixture_graph.lookup("cafe")],
            PathQueryConfig(k=2),
        )
        assert linearize(paths[0]).text == "coffee related to cafe"
        from kgalign.pathfinder import subgraph_from_paths

        assert linearize(subgraph_from_paths(paths)).text == "coffee related to cafe"

    def test_injective_on_differing_labels(self):
        rng = random.Random(9)
        words = ["alpha", "beta", "gamma", "delta"]
        seen = {}
        for _ in range(200):
            triples = [
                (rng.choice(words), "related to", rng.choice(words))
                for _ in range(rng.randint(1, 3))
            ]
            text = linearize(triples).text
            key = tuple(triples)
            if text in seen:
                assert seen[text] == key
            seen[text] = key

    def test_source_reference_kept(self):
        lin = linearize(MAKEUP_GOLD_TRIPLES)
        assert lin.source is MAKEUP_GOLD_TRIPLES


class TestBuiltinEmbedder:
    def test_empty_text_is_zero_vector(self):
        vec = embed(HashedNgramEmbedder(), "")
        assert vec.is_zero
        assert vec.dim == 1024

    def test_deterministic(self):
        provider = HashedNgramEmbedder()
        a = embed(provider, "coffee related to cafe")
        b = embed(provider, "coffee related to cafe")
        assert np.array_equal(a.values, b.values)

    def test_unit_norm_matches_oracle(self):
        provider = HashedNgramEmbedder()
        for text in ("coffee related to cafe", "The women met for coffee", "ab cd ef"):
            vec = embed(provider, text)
            assert math.isclose(float(np.linalg.norm(vec.values)), 1.0, abs_tol=1e-12)
            expected = oracle_embed(text)
            for bucket, value in expected.items():
                assert math.isclose(vec.values[bucket], value, abs_tol=1e-12)
            assert np.count_nonzero(vec.values) == len(expected)

    def test_short_text_still_unit_norm(self):
        vec = embed(HashedNgramEmbedder(), "ab")
        assert not vec.is_zero
        assert math.isclose(float(np.linalg.norm(vec.values)), 1.0, abs_tol=1e-12)

    def test_whitespace_only_is_zero(self):
        assert embed(HashedNgramEmbedder(), "   ").is_zero


class TestCosine:
    def test_identity(self):
        v = embed(HashedNgramEmbedder(), "coffee related to cafe")
        assert abs(cosine(v, v) - 1.0) <= 1e-9

    def test_orthogonal_one_hots(self):
        a = EmbeddingVector(np.array([1.0, 0.0]), 2)
        b = EmbeddingVector(np.array([0.0, 1.0]), 2)
        assert cosine(a, b) == 0.0

    def test_scale_invariance(self):
        v = embed(HashedNgramEmbedder(), "bodybuilder capable of lift weights")
        doubled = EmbeddingVector(2.0 * v.values, v.dim)
        assert abs(cosine(v, doubled) - 1.0) <= 1e-12

    def test_symmetry(self):
        provider = HashedNgramEmbedder()
        a = embed(provider, "coffee related to cafe")
        b = embed(provider, "dog capable of bark")
        assert abs(cosine(a, b) - cosine(b, a)) <= 1e-12

    def test_zero_vector_convention(self):
        provider = HashedNgramEmbedder()
        zero = embed(provider, "")
        other = embed(provider, "coffee")
        assert cosine(zero, other) == 0.0

    def test_dim_mismatch_rejected(self):
        a = EmbeddingVector(np.ones(4), 4)
        b = EmbeddingVector(np.ones(8), 8)
        with pytest.raises(ValueError):
            cosine(a, b)


class TestPrune:
    CONTEXT = (
        "The women met for coffee The cafe reopened in a new location "
        "They wanted to catch up with each other"
    )

    def test_ranking_matches_oracle(self):
        candidates = [
            [("dog", "capable of", "bark")],
            [("coffee", "related to", "cafe")],
        ]
        expected = sorted(
            range(len(candidates)),
            key=lambda i: -oracle_similarity(self.CONTEXT, linearize(candidates[i]).text),
        )
        ranked = prune(candidates, self.CONTEXT, HashedNgramEmbedder(), top_n=2)
        assert [candidates.index(c) for c, _ in ranked] == expected
        assert ranked[0][0] == [("coffee", "related to", "cafe")]
        for cand, score in ranked:
            oracle = oracle_similarity(self.CONTEXT, linearize(cand).text)
            assert math.isclose(score, oracle, abs_tol=1e-12)

    def test_single_candidate_returned_with_score(self):
        ranked = prune([[("a", "is a", "b")]], "unrelated context", HashedNgramEmbedder())
        assert len(ranked) == 1
        assert isinstance(ranked[0][1], float)

    def test_top_n_larger_than_candidates(self):
        candidates = [[("a", "is a", "b")], [("c", "is a", "d")]]
        ranked = prune(candidates, "a is a b", HashedNgramEmbedder(), top_n=10)
        assert len(ranked) == 2
        assert ranked[0][1] >= ranked[1][1]

    def test_empty_candidates(self):
        assert prune([], "context", HashedNgramEmbedder()) == []

    def test_top_n_validated(self):
        with pytest.raises(ValueError):
            prune([[("a", "is a", "b")]], "ctx", HashedNgramEmbedder(), top_n=0)

    def test_duplicating_a_loser_never_changes_the_winner(self):
        rng = random.Random(31)
        words = ["coffee", "cafe", "gym", "muscle", "makeup", "scar", "tape", "dog"]
        provider = HashedNgramEmbedder()
        for _ in range(50):
            context = " ".join(rng.choice(words) for _ in range(6))
            candidates = [
                [(rng.choice(words), "related to", rng.choice(words))] for _ in range(4)
            ]
            ranked = prune(candidates, context, provider, top_n=len(candidates))
            winner = ranked[0][0]
            loser = ranked[-1][0]
            again = prune(candidates + [list(loser)], context, provider)
            assert again[0][0] == winner

    def test_permutation_stability_with_distinct_scores(self):
        rng = random.Random(8)
        words = ["coffee", "cafe", "gym", "muscle", "makeup", "scar", "bark", "dog"]
        provider = HashedNgramEmbedder()
        checked = 0
        attempts = 0
        while checked < 200 and attempts < 2000:
            attempts += 1
            context = " ".join(rng.choice(words) for _ in range(6))
            candidates = [
                [(rng.choice(words), "related to", rng.choice(words))]
                for _ in range(rng.randint(2, 5))
            ]
            scores = {
                linearize(c).text: oracle_similarity(context, linearize(c).text)
                for c in candidates
            }
            if len(set(scores.values())) != len(candidates):
                continue  # permutation stability is only defined for distinct scores
            checked += 1
            winner = prune(candidates, context, provider)[0][0]
            shuffled = list(candidates)
            rng.shuffle(shuffled)
            assert prune(shuffled, context, provider)[0][0] == winner
        assert checked == 200

    def test_tie_break_by_input_order(self):
        a = [("coffee", "related to", "cafe")]
        b = [list(a[0])]  # same rendering, same score
        ranked = prune([a, b], "coffee related to cafe", HashedNgramEmbedder(), top_n=2)
        assert ranked[0][0] is a


def _mock_embed_app():
    """An /embed service with failure modes keyed on magic input texts."""
    good = HashedNgramEmbedder(dim=8)
    app = FastAPI()

    @app.post("/embed")
    def handle(body: dict):
        texts = body["texts"]
        if "__boom__" in texts:
            return JSONResponse({"error": "exploded"}, status_code=500)
        if "__short_count__" in texts:
            return {"dim": 8, "vectors": []}
        if "__bad_dim__" in texts:
            return {"dim": 8, "vectors": [[1.0, 2.0] for _ in texts]}
        if "__nan__" in texts:
            import json

            from fastapi.responses import Response

            body = json.dumps({"dim": 2, "vectors": [[float("nan"), 0.0] for _ in texts]})
            return Response(body, media_type="application/json")
        if "__drift__" in texts:
            return {"dim": 4, "vectors": [[0.0, 0.0, 0.0, 1.0] for _ in texts]}
        return {"dim": 8, "vectors": [v.values.tolist() for v in good.embed_batch(texts)]}

    return app


@pytest.fixture(scope="module")
def mock_embed_url():
    with ServerThread(_mock_embed_app()) as server:
        yield server.base_url


class TestRemoteEmbedder:
    def test_happy_path_matches_local_math(self, mock_embed_url):
        provider = RemoteEmbedder(mock_embed_url)
        vectors = provider.embed_batch(["coffee related to cafe", "dog capable of bark"])
        assert provider.dim == 8
        assert all(v.dim == 8 for v in vectors)
        local = HashedNgramEmbedder(dim=8).embed_batch(
            ["coffee related to cafe", "dog capable of bark"]
        )
        for remote_vec, local_vec in zip(vectors, local):
            assert np.allclose(remote_vec.values, local_vec.values)

    def test_non_200_raises_provider_error(self, mock_embed_url):
        with pytest.raises(ProviderError, match="500"):
            RemoteEmbedder(mock_embed_url).embed_batch(["__boom__"])

    def test_count_mismatch_raises(self, mock_embed_url):
        with pytest.raises(ProviderError, match="vectors"):
            RemoteEmbedder(mock_embed_url).embed_batch(["__short_count__"])

    def test_vector_dim_mismatch_raises(self, mock_embed_url):
        with pytest.raises(ProviderError, match="shape"):
            RemoteEmbedder(mock_embed_url).embed_batch(["__bad_dim__"])

    def test_non_finite_values_raise(self, mock_embed_url):
        with pytest.raises(ProviderError, match="non-finite"):
            RemoteEmbedder(mock_embed_url).embed_batch(["__nan__"])

    def test_dim_drift_raises(self, mock_embed_url):
        provider = RemoteEmbedder(mock_embed_url)
        provider.embed_batch(["warm up"])
        with pytest.raises(ProviderError, match="dim changed"):
            provider.embed_batch(["__drift__"])

    def test_unreachable_service_raises(self):
        provider = RemoteEmbedder("http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(ProviderError, match="unreachable"):
            provider.embed_batch(["hello"])

    def test_fallback_only_when_configured(self, mock_embed_url):
        flaky = RemoteEmbedder(mock_embed_url)
        wrapped = FallbackEmbedder(flaky, HashedNgramEmbedder())
        vectors = wrapped.embed_batch(["__boom__"])
        assert vectors[0].dim == 1024  # served by the builtin fallback
