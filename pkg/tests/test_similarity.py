import random
import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textkg.model import EntityRecord, PredicateRecord
from textkg.similarity import (
    HashedTrigramEmbedder,
    SimilarityWeights,
    Thresholds,
    cosine,
    description_similarity,
    entity_pair_admitted,
    entity_score,
    label_similarity,
    levenshtein,
    predicate_pair_admitted,
    predicate_score,
    similar_entities,
    type_similarity,
)

WEIGHTS = SimilarityWeights()
THRESHOLDS = Thresholds()


def oracle_levenshtein(a: str, b: str) -> int:
    """Independent full-matrix dynamic program."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1, table[i][j - 1] + 1, table[i - 1][j - 1] + cost
            )
    return table[m][n]


class PresetProvider:
    """Returns preset vectors keyed by exact text; fails loudly on misses."""

    dimension = 3

    def __init__(self, vectors: dict[str, list[float]]):
        self.vectors = vectors

    def embed(self, text: str) -> np.ndarray:
        return np.asarray(self.vectors[text], dtype=np.float64)


class TestLevenshtein:
    def test_identity(self):
        assert label_similarity("car", "car") == 1.0

    def test_car_cat(self):
        assert label_similarity("car", "cat") == pytest.approx(2 / 3, abs=1e-9)

    def test_empty_vs_nonempty(self):
        assert label_similarity("", "abc") == 0.0

    def test_both_empty(self):
        assert label_similarity("", "") == 1.0

    def test_case_folded(self):
        assert label_similarity("CAGLIARI", "cagliari") == 1.0

    def test_matches_oracle_on_random_pairs(self):
        rng = random.Random(5150)
        alphabet = string.ascii_lowercase + " '"
        for _ in range(300):
            a = "".join(rng.choices(alphabet, k=rng.randint(0, 40)))
            b = "".join(rng.choices(alphabet, k=rng.randint(0, 40)))
            assert levenshtein(a, b) == oracle_levenshtein(a, b)

    @given(st.text(max_size=25), st.text(max_size=25))
    @settings(max_examples=150, deadline=None)
    def test_symmetry_and_bounds(self, a, b):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert 0.0 <= label_similarity(a, b) <= 1.0
        assert label_similarity(a, b) == label_similarity(b, a)


class TestDescriptionSimilarity:
    def test_identical_descriptions(self):
        provider = HashedTrigramEmbedder()
        assert description_similarity("a terrace", "a terrace", provider) == pytest.approx(
            1.0, abs=1e-6
        )

    def test_orthogonal_vectors(self):
        provider = PresetProvider({"a": [1, 0, 0], "b": [0, 1, 0]})
        assert description_similarity("a", "b", provider) == 0.0

    def test_negative_cosine_clamped(self):
        provider = PresetProvider({"a": [1, 0, 0], "b": [-1, 0, 0]})
        assert description_similarity("a", "b", provider) == 0.0

    def test_empty_description_scores_zero(self):
        provider = HashedTrigramEmbedder()
        assert description_similarity("", "anything", provider) == 0.0

    def test_frozen_stub_pair(self):
        # Computed once with the hashed-trigram embedder at dimension 128.
        provider = HashedTrigramEmbedder(128)
        a = "A panoramic terrace in Cagliari, offering a romantic view of the sunset"
        b = "A historic quarter of Cagliari near the port, known for its restaurants"
        assert description_similarity(a, b, provider) == pytest.approx(
            0.49058876746406815, abs=1e-9
        )

    def test_stub_is_deterministic(self):
        provider = HashedTrigramEmbedder()
        v1 = provider.embed("the same text")
        v2 = provider.embed("the same text")
        assert np.array_equal(v1, v2)
        assert np.all(np.isfinite(v1))

    def test_zero_vector_cosine_zero(self):
        assert cosine(np.zeros(4), np.ones(4)) == 0.0


def entity(label, description="", types=()):
    return EntityRecord(label=label, description=description, types=list(types))


class TestTypeSimilarity:
    def test_shared_identical_type(self):
        assert type_similarity(entity("a", types=["City"]), entity("b", types=["City", "Landmark"])) == 1.0

    def test_empty_list_scores_zero(self):
        assert type_similarity(entity("a"), entity("b", types=["City"])) == 0.0

    def test_attraction_vs_destination_frozen(self):
        # DP oracle: distance 6 over max length 19.
        i = entity("a", types=["Tourist Attraction"])
        j = entity("b", types=["Tourist Destination"])
        expected = 1 - 6 / 19
        assert type_similarity(i, j) == pytest.approx(expected, abs=1e-12)
        assert oracle_levenshtein("tourist attraction", "tourist destination") == 6


class TestScores:
    def test_all_ones(self):
        provider = HashedTrigramEmbedder()
        i = entity("car", "same words here")
        j = entity("car", "same words here")
        assert entity_score(i, j, WEIGHTS, provider) == pytest.approx(1.0, abs=1e-9)

    def test_direct_substitution(self):
        # labels at similarity 0.5, descriptions at cosine 0.8
        provider = PresetProvider({"d1": [1, 0, 0], "d2": [0.8, 0.6, 0]})
        i = entity("ab", "d1")
        j = entity("ax", "d2")
        expected = 0.35 * 0.5 + 0.65 * 0.8
        assert entity_score(i, j, WEIGHTS, provider) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.695, abs=1e-12)

    def test_predicate_substitution_below_threshold(self):
        provider = PresetProvider({"d1": [1, 0, 0], "d2": [0.9, np.sqrt(1 - 0.81), 0]})
        i = PredicateRecord(label="abcde", description="d1")
        j = PredicateRecord(label="abxyz", description="d2")
        score = predicate_score(i, j, WEIGHTS, provider)
        assert score == pytest.approx(0.25 * 0.4 + 0.75 * 0.9, abs=1e-9)
        assert score == pytest.approx(0.775, abs=1e-9)
        assert not predicate_pair_admitted(score, THRESHOLDS)

    def test_symmetry_on_random_records(self):
        rng = random.Random(1234)
        provider = HashedTrigramEmbedder()
        words = "harbor tower park museum beach cloister gulf lagoon".split()
        for _ in range(40):
            i = entity(
                " ".join(rng.choices(words, k=2)),
                " ".join(rng.choices(words, k=6)),
                rng.sample(words, k=2),
            )
            j = entity(
                " ".join(rng.choices(words, k=2)),
                " ".join(rng.choices(words, k=6)),
                rng.sample(words, k=2),
            )
            assert entity_score(i, j, WEIGHTS, provider) == entity_score(j, i, WEIGHTS, provider)
            assert type_similarity(i, j) == type_similarity(j, i)

    def test_self_similarity_admitted(self):
        provider = HashedTrigramEmbedder()
        record = entity("Cagliari", "The capital of Sardinia", ["City"])
        assert similar_entities(record, record, WEIGHTS, THRESHOLDS, provider)


class TestThresholdBoundaries:
    def test_entity_truth_table(self):
        expectations = {
            (0.69, 0.25): False,
            (0.69, 0.26): False,
            (0.70, 0.25): False,
            (0.70, 0.26): False,
            (0.71, 0.25): False,
            (0.71, 0.26): True,
            (0.80, 0.25): False,
            (0.80, 0.26): True,
            (0.90, 0.25): True,
            (0.90, 0.26): True,
            (0.91, 0.25): True,
            (0.91, 0.26): True,
        }
        for (score, type_score), expected in expectations.items():
            assert entity_pair_admitted(score, type_score, THRESHOLDS) is expected, (
                score,
                type_score,
            )

    def test_predicate_boundary(self):
        assert predicate_pair_admitted(0.8, THRESHOLDS)
        assert not predicate_pair_admitted(0.7999999, THRESHOLDS)


class TestWeightValidation:
    def test_pairs_must_sum_to_one(self):
        with pytest.raises(ValueError):
            SimilarityWeights(entity_label_weight=0.4, entity_description_weight=0.65)

    def test_threshold_ordering(self):
        with pytest.raises(ValueError):
            Thresholds(entity_high=0.6, entity_low=0.7)
