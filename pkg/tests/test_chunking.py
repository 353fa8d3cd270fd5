import random

import pytest

from textkg.chunking import SplitConfig, attach_summaries, reassemble, rolling_summary, split
from textkg.gateway import FixtureBackend
from conftest import script


def make_text(n_tokens: int) -> str:
    return " ".join(f"tok{i}" for i in range(n_tokens))


class TestSplitConfig:
    def test_overlap_must_be_smaller_than_window(self):
        with pytest.raises(ValueError):
            SplitConfig(window_tokens=100, overlap_tokens=100)

    def test_window_positive(self):
        with pytest.raises(ValueError):
            SplitConfig(window_tokens=0, overlap_tokens=0)


class TestSplit:
    def test_three_window_example(self):
        # Stride 300 over 1000 tokens: windows [0,400), [300,700), [600,1000).
        chunks = split(make_text(1000), SplitConfig(400, 100))
        assert [(c.token_start, c.token_end) for c in chunks] == [
            (0, 400),
            (300, 700),
            (600, 1000),
        ]
        assert all(c.token_count <= 400 for c in chunks)

    def test_short_text_single_chunk(self):
        text = make_text(660)
        chunks = split(text, SplitConfig(2000, 200))
        assert len(chunks) == 1
        assert chunks[0].text == text

    def test_empty_text(self):
        assert split("", SplitConfig(100, 10)) == []
        assert split("   \n\t ", SplitConfig(100, 10)) == []

    def test_no_word_is_split(self):
        text = "alpha beta gamma delta epsilon zeta eta theta"
        chunks = split(text, SplitConfig(3, 1))
        words = set(text.split())
        for chunk in chunks:
            for word in chunk.text.split():
                assert word in words

    def test_summary_empty_on_fresh_chunks(self):
        chunks = split(make_text(10), SplitConfig(4, 1))
        assert all(c.summary == "" for c in chunks)

    def test_random_property_suite(self):
        rng = random.Random(20240814)
        separators = [" ", "  ", "\n", "\t", " \n "]
        for _ in range(200):
            n_tokens = rng.randint(0, 120)
            words = [f"w{i}x" * rng.randint(1, 3) for i in range(n_tokens)]
            text = "".join(
                w + rng.choice(separators) for w in words
            )
            if rng.random() < 0.3:
                text = rng.choice(separators) + text
            window = rng.randint(1, 40)
            overlap = rng.randint(0, window - 1)
            config = SplitConfig(window, overlap)
            chunks = split(text, config)
            if n_tokens == 0:
                assert chunks == []
                continue
            # coverage: overlap-stripped concatenation reconstructs the source
            assert reassemble(chunks) == text
            # monotone offsets
            starts = [c.start_offset for c in chunks]
            ends = [c.end_offset for c in chunks]
            assert starts == sorted(set(starts))
            assert ends == sorted(set(ends))
            # window bound
            assert all(c.token_count <= window for c in chunks)
            # overlap region non-empty whenever configured and more than one chunk
            if len(chunks) > 1 and overlap > 0:
                assert all(c.overlap_token_count > 0 for c in chunks[1:])


class TestRollingSummary:
    def test_single_summarization_call(self, templates):
        backend = FixtureBackend({})
        script(
            backend,
            templates.get("summarization"),
            response="A short recap.",
            system={"budget": "512"},
            user={"summary": "(none yet)", "text": "First chunk text."},
        )
        result = rolling_summary("", "First chunk text.", backend, templates, 512)
        assert result == "A short recap."
        assert backend.calls_made == 1

    def test_chain_of_three_chunks_two_calls(self, templates):
        text = make_text(30)
        config = SplitConfig(window_tokens=12, overlap_tokens=2, summary_budget_tokens=64)
        chunks = split(text, config)
        assert len(chunks) == 3
        backend = FixtureBackend({})
        script(
            backend,
            templates.get("summarization"),
            response="summary one",
            system={"budget": "64"},
            user={"summary": "(none yet)", "text": chunks[0].text},
        )
        script(
            backend,
            templates.get("summarization"),
            response="summary two",
            system={"budget": "64"},
            user={"summary": "summary one", "text": chunks[1].text},
        )
        attach_summaries(chunks, backend, templates, config)
        assert backend.calls_made == 2
        assert chunks[0].summary == ""
        assert chunks[1].summary == "summary one"
        assert chunks[2].summary == "summary two"

    def test_single_chunk_no_calls(self, templates):
        config = SplitConfig(window_tokens=100, overlap_tokens=10)
        chunks = split(make_text(5), config)
        backend = FixtureBackend({})
        attach_summaries(chunks, backend, templates, config)
        assert backend.calls_made == 0

    def test_over_budget_response_truncated(self, templates):
        backend = FixtureBackend({})
        script(
            backend,
            templates.get("summarization"),
            response=" ".join(["word"] * 50),
            system={"budget": "8"},
            user={"summary": "(none yet)", "text": "chunk"},
        )
        result = rolling_summary("", "chunk", backend, templates, 8)
        assert len(result.split()) == 8
