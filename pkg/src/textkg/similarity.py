"""Similarity scoring for entity and predicate resolution.

Labels are compared with normalized Levenshtein distance, descriptions with
the cosine of an embedding provider's vectors (clamped at zero so weighted
scores stay in [0, 1]), and entity types with the best label match across
the two type lists.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .model import EntityRecord, PredicateRecord


@dataclass(frozen=True)
class SimilarityWeights:
    entity_label_weight: float = 0.35
    entity_description_weight: float = 0.65
    predicate_label_weight: float = 0.25
    predicate_description_weight: float = 0.75

    def __post_init__(self) -> None:
        pairs = (
            (self.entity_label_weight, self.entity_description_weight),
            (self.predicate_label_weight, self.predicate_description_weight),
        )
        for a, b in pairs:
            if not (0 <= a <= 1 and 0 <= b <= 1):
                raise ValueError("weights must lie in [0, 1]")
            if abs(a + b - 1.0) > 1e-9:
                raise ValueError("weight pairs must sum to 1")


@dataclass(frozen=True)
class Thresholds:
    entity_high: float = 0.9
    entity_low: float = 0.7
    type_gate: float = 0.25
    predicate_min: float = 0.8

    def __post_init__(self) -> None:
        if not 0 <= self.entity_low < self.entity_high <= 1:
            raise ValueError("need 0 <= entity_low < entity_high <= 1")
        if not 0 <= self.type_gate <= 1 or not 0 <= self.predicate_min <= 1:
            raise ValueError("type_gate and predicate_min must lie in [0, 1]")


def levenshtein(a: str, b: str) -> int:
    """Edit distance, two-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def _fold(text: str) -> str:
    return text.strip().casefold()


def label_similarity(a: str, b: str) -> float:
    """1 - distance/max-length over case-folded, trimmed labels; 1.0 for two empties."""
    a, b = _fold(a), _fold(b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedTrigramEmbedder:
    """Deterministic embedding stub: counts of hashed character trigrams.

    Same text always maps to the same vector, with no model downloads and no
    network, which keeps resolution runs reproducible in tests and fixtures.
    """

    def __init__(self, dimension: int = 128):
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        folded = " ".join(_fold(text).split())
        vector = np.zeros(self.dimension, dtype=np.float64)
        grams = (
            [folded[i : i + 3] for i in range(len(folded) - 2)] if len(folded) >= 3 else [folded]
        )
        for gram in grams:
            if not gram:
                continue
            bucket = int(hashlib.sha1(gram.encode("utf-8")).hexdigest(), 16) % self.dimension
            vector[bucket] += 1.0
        return vector


class RemoteEmbeddingProvider:
    """Adapter for an embeddings HTTP endpoint returning {"data":[{"embedding":[...]}]}."""

    def __init__(self, endpoint: str, model: str = "", credential_env: str = "TEXTKG_API_KEY", dimension: int = 512):
        self.endpoint = endpoint
        self.model = model
        self.credential_env = credential_env
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        import os

        import requests

        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.credential_env, "")
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        body = {"input": [text]}
        if self.model:
            body["model"] = self.model
        response = requests.post(self.endpoint, json=body, headers=headers, timeout=120)
        response.raise_for_status()
        return np.asarray(response.json()["data"][0]["embedding"], dtype=np.float64)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def description_similarity(a: str, b: str, provider: EmbeddingProvider) -> float:
    """Cosine of the two description embeddings, clamped below at zero.

    An empty description scores 0: the pair can then merge on labels alone
    only if the weighted score still clears its threshold.
    """
    if not a.strip() or not b.strip():
        return 0.0
    return max(0.0, cosine(provider.embed(a), provider.embed(b)))


def type_similarity(i: EntityRecord, j: EntityRecord) -> float:
    """Best label match across the two type lists; 0 when either list is empty."""
    if not i.types or not j.types:
        return 0.0
    return max(label_similarity(a, b) for a in i.types for b in j.types)


def entity_score(
    i: EntityRecord,
    j: EntityRecord,
    weights: SimilarityWeights,
    provider: EmbeddingProvider,
) -> float:
    return (
        weights.entity_label_weight * label_similarity(i.label, j.label)
        + weights.entity_description_weight
        * description_similarity(i.description, j.description, provider)
    )


def predicate_score(
    i: PredicateRecord,
    j: PredicateRecord,
    weights: SimilarityWeights,
    provider: EmbeddingProvider,
) -> float:
    return (
        weights.predicate_label_weight * label_similarity(i.label, j.label)
        + weights.predicate_description_weight
        * description_similarity(i.description, j.description, provider)
    )


def entity_pair_admitted(score: float, type_score: float, thresholds: Thresholds) -> bool:
    """High-score pairs merge outright; mid-band pairs need somewhat related types."""
    if score >= thresholds.entity_high:
        return True
    return (
        thresholds.entity_low < score < thresholds.entity_high
        and type_score > thresholds.type_gate
    )


def predicate_pair_admitted(score: float, thresholds: Thresholds) -> bool:
    return score >= thresholds.predicate_min


def similar_entities(
    i: EntityRecord,
    j: EntityRecord,
    weights: SimilarityWeights,
    thresholds: Thresholds,
    provider: EmbeddingProvider,
) -> bool:
    return entity_pair_admitted(
        entity_score(i, j, weights, provider), type_similarity(i, j), thresholds
    )


def similar_predicates(
    i: PredicateRecord,
    j: PredicateRecord,
    weights: SimilarityWeights,
    thresholds: Thresholds,
    provider: EmbeddingProvider,
) -> bool:
    return predicate_pair_admitted(predicate_score(i, j, weights, provider), thresholds)
