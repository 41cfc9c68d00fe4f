# -*- coding: utf-8 -*-
"""Selection of few-shot demonstrations.

Three policies are supported:

* :class:`RandomCoverage` draws `k` random demonstrations, redrawing up to
  `attempts` times to cover as many distinct labels as possible.
* :class:`Fixed` always uses the same curated list.
* :class:`Retrieve` ranks candidates by cosine similarity of precomputed
  embeddings and draws `k` of the `pool` most similar.

Every query gets its own random generator, derived from the run seed and the
query id, so selections do not depend on the order queries are processed in.
"""
from abc import ABCMeta, abstractmethod
import hashlib
import logging
from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)
import numpy as np
from xlit.corpus import EmbeddingVector, Example, SeqLab
from xlit.types import MAX_SEED, Seed


LOG = logging.getLogger(__name__)


class SelectionError(ValueError):
    """Raised when demonstrations cannot be selected."""


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity of two vectors.

    Args:
        a: First vector.
        b: Second vector.

    Returns:
        dot(a, b) / (|a| * |b|), clipped to [-1, 1].

    Raises:
        SelectionError if the dimensions differ or a vector has zero norm.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SelectionError(f"Dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise SelectionError("Cosine similarity is undefined for a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def query_rng(seed: Seed, query_id: str) -> np.random.Generator:
    """The PCG64 generator for one query.

    The generator is seeded with a SeedSequence over (seed, H), where H is
    the first 128 bits of SHA-256(query_id) as a big-endian integer.

    Raises:
        ValueError if the seed is not a 64-bit unsigned integer.
    """
    if not (0 <= seed <= MAX_SEED):
        raise ValueError(f"Seed must be in [0, 2**64): {seed}")
    digest = hashlib.sha256(query_id.encode("utf-8")).digest()
    entropy = (int(seed), int.from_bytes(digest[:16], "big"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def label_coverage(examples: Iterable[Example]) -> int:
    """Number of distinct labels among `examples`: entity tags (ignoring O)
    for tagged sentences, class labels otherwise.
    """
    labels: Set = set()
    for example in examples:
        if isinstance(example.payload, SeqLab):
            labels.update(tag for tag in example.payload.tags if tag.is_entity)
        else:
            labels.add(example.payload.label)
    return len(labels)


def _candidate_pool(query_id: str, candidates: Sequence[Example]) -> List[Example]:
    pool = [c for c in candidates if c.id != query_id]
    ids = [c.id for c in pool]
    if len(set(ids)) != len(ids):
        raise SelectionError("Candidate ids are not unique")
    return pool


class SelectionPolicy(metaclass=ABCMeta):
    """Base class for demonstration selection policies."""

    name: str = None

    @abstractmethod
    def select(
        self,
        query_id: str,
        candidates: Sequence[Example],
        embeddings: Optional[Mapping[str, EmbeddingVector]],
        seed: Seed,
    ) -> List[Example]:
        """Select demonstrations for one query.

        Args:
            query_id: Id of the query; never selected.
            candidates: The demonstration pool.
            embeddings: Embeddings by example id (required by some
                policies).
            seed: The run seed.

        Returns:
            The demonstrations, in prompt order.
        """

    @abstractmethod
    def describe(self) -> str:
        """Short description recorded in reports."""

    def __repr__(self) -> str:
        return self.describe()

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.describe() == other.describe()

    def __hash__(self) -> int:
        return hash(self.describe())


class RandomCoverage(SelectionPolicy):
    """Best-of-`attempts` random draws of `k` demonstrations, scored by
    :func:`label_coverage`. The first draw with the highest coverage wins;
    drawing stops as soon as no better coverage is possible.

    Args:
        k: Number of demonstrations.
        attempts: Maximum number of draws.
    """

    name = "random"

    def __init__(self, k: int = 3, attempts: int = 8) -> None:
        if k < 1:
            raise ValueError(f"k must be >= 1: {k}")
        if attempts < 1:
            raise ValueError(f"attempts must be >= 1: {attempts}")
        self.k = k
        self.attempts = attempts

    def describe(self) -> str:
        return f"random(k={self.k},attempts={self.attempts})"

    def select(self, query_id, candidates, embeddings=None, seed=0):
        pool = _candidate_pool(query_id, candidates)
        if len(pool) < self.k:
            raise SelectionError(
                f"Query {query_id}: {len(pool)} candidates, {self.k} demonstrations required"
            )
        rng = query_rng(seed, query_id)
        bound = label_coverage(pool)
        if pool and not isinstance(pool[0].payload, SeqLab):
            bound = min(bound, self.k)
        best: Optional[List[Example]] = None
        best_coverage = -1
        for _ in range(self.attempts):
            draw = [pool[i] for i in rng.choice(len(pool), size=self.k, replace=False)]
            coverage = label_coverage(draw)
            if coverage > best_coverage:
                best, best_coverage = draw, coverage
            if best_coverage >= bound:
                break
        return best


class Fixed(SelectionPolicy):
    """The same demonstrations for every query, in listed order. A listed id
    equal to the query id is skipped.

    Args:
        ids: Example ids; non-empty and distinct.
    """

    name = "fixed"

    def __init__(self, ids: Sequence[str]) -> None:
        ids = tuple(ids)
        if not ids:
            raise ValueError("Fixed demonstration list is empty")
        if len(set(ids)) != len(ids):
            raise ValueError(f"Fixed demonstration ids are not distinct: {', '.join(ids)}")
        self.ids = ids

    @property
    def k(self) -> int:
        return len(self.ids)

    def describe(self) -> str:
        return f"fixed({','.join(self.ids)})"

    def check(self, candidates: Sequence[Example]) -> None:
        """Raise SelectionError if any id is not among `candidates`."""
        known = {c.id for c in candidates}
        missing = [i for i in self.ids if i not in known]
        if missing:
            raise SelectionError(f"Fixed demonstration ids not found: {', '.join(missing)}")

    def select(self, query_id, candidates, embeddings=None, seed=0):
        self.check(candidates)
        by_id = {c.id: c for c in candidates}
        if query_id in self.ids:
            LOG.warning("Skipping query %s in its own fixed demonstration list", query_id)
        return [by_id[i] for i in self.ids if i != query_id]


def rank_by_similarity(
    query_vector: EmbeddingVector,
    candidates: Sequence[Example],
    embeddings: Mapping[str, EmbeddingVector],
) -> List[Tuple[Example, float]]:
    """Rank candidates by descending cosine similarity to `query_vector`;
    ties are broken by ascending id.

    Raises:
        SelectionError if a candidate has no embedding.
    """
    scored = []
    for candidate in candidates:
        if candidate.id not in embeddings:
            raise SelectionError(f"No embedding for candidate {candidate.id}")
        scored.append((candidate, cosine_similarity(query_vector, embeddings[candidate.id])))
    scored.sort(key=lambda item: (-item[1], item[0].id))
    return scored


class Retrieve(SelectionPolicy):
    """Draw `k` of the `pool` candidates most similar to the query. The
    result is in similarity order, most similar first.

    Args:
        k: Number of demonstrations.
        pool: Number of top-ranked candidates to draw from.
    """

    name = "retrieve"

    def __init__(self, k: int = 3, pool: int = 10) -> None:
        if k < 1:
            raise ValueError(f"k must be >= 1: {k}")
        if pool < k:
            raise ValueError(f"pool ({pool}) must be >= k ({k})")
        self.k = k
        self.pool = pool

    def describe(self) -> str:
        return f"retrieve(k={self.k},pool={self.pool})"

    def select(self, query_id, candidates, embeddings=None, seed=0):
        if embeddings is None:
            raise SelectionError("Retrieval requires embeddings")
        if query_id not in embeddings:
            raise SelectionError(f"No embedding for query {query_id}")
        pool = _candidate_pool(query_id, candidates)
        if len(pool) < self.k:
            raise SelectionError(
                f"Query {query_id}: {len(pool)} candidates, {self.k} demonstrations required"
            )
        ranked = rank_by_similarity(embeddings[query_id], pool, embeddings)[: self.pool]
        rng = query_rng(seed, query_id)
        chosen = sorted(rng.choice(len(ranked), size=self.k, replace=False))
        return [ranked[i][0] for i in chosen]


POLICIES = {cls.name: cls for cls in (RandomCoverage, Fixed, Retrieve)}


def make_policy(
    name: str,
    shots: int = 3,
    attempts: int = 8,
    pool: int = 10,
    fixed_ids: Sequence[str] = (),
) -> SelectionPolicy:
    """Build a policy from run-config values.

    Raises:
        ValueError if the name is unknown or the parameters are invalid.
    """
    if name == RandomCoverage.name:
        return RandomCoverage(shots, attempts)
    if name == Fixed.name:
        return Fixed(fixed_ids)
    if name == Retrieve.name:
        return Retrieve(shots, pool)
    raise ValueError(f"Unknown selection policy {name!r}; expected one of {', '.join(POLICIES)}")


def select(
    policy: SelectionPolicy,
    query_id: str,
    candidates: Sequence[Example],
    embeddings: Optional[Mapping[str, EmbeddingVector]] = None,
    seed: Seed = 0,
) -> List[Example]:
    """Select demonstrations for one query. See :meth:`SelectionPolicy.select`.
    """
    return policy.select(query_id, candidates, embeddings, seed)


def select_all(
    policy: SelectionPolicy,
    queries: Iterable[Example],
    candidates: Sequence[Example],
    embeddings: Optional[Mapping[str, EmbeddingVector]] = None,
    seed: Seed = 0,
) -> Dict[str, Tuple[Example, ...]]:
    """Select demonstrations for every query in one pass, in id order.

    Returns:
        Dict mapping query id to its demonstrations.
    """
    return {
        query.id: tuple(policy.select(query.id, candidates, embeddings, seed))
        for query in sorted(queries, key=lambda q: q.id)
    }
