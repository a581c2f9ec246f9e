from __future__ import annotations

import hashlib
import json

from duocorpus import generate_corpus, load_config, load_corpus
from duocorpus.tokencount import ReferenceTokenizer


def _file_hashes(spec):
    out = {}
    for path in [*spec.source_files, spec.benchmark_path, spec.config_path]:
        out[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


def test_generation_is_deterministic(tmp_path):
    a = generate_corpus(tmp_path / "a", seed=0)
    b = generate_corpus(tmp_path / "b", seed=0)
    assert _file_hashes(a) == _file_hashes(b)
    c = generate_corpus(tmp_path / "c", seed=1)
    assert _file_hashes(c) != _file_hashes(a)


def test_bookkeeping_matches_files(tmp_path):
    spec = generate_corpus(tmp_path, seed=0)
    assert len(spec.source_files) == 5
    assert spec.benchmark_path.is_file()
    assert spec.config_path.is_file()

    total_lines = 0
    json_broken = 0
    for path in spec.source_files:
        for line in path.read_text(encoding="utf-8").splitlines():
            total_lines += 1
            try:
                json.loads(line)
            except json.JSONDecodeError:
                json_broken += 1
    assert total_lines == spec.n_lines
    # some planted rejects are valid JSON with a broken shape
    assert 0 < json_broken <= spec.n_malformed
    assert spec.n_parseable == spec.n_lines - spec.n_malformed


def test_planted_counts_flow_through_ingest(tmp_path):
    spec = generate_corpus(tmp_path, seed=0)
    config = load_config(spec.config_path)
    tok = ReferenceTokenizer()

    loaded = 0
    skipped = 0
    for src in config.sources:
        stream = load_corpus(src.path, src.schema, tokenizer=tok)
        loaded += len(stream.collect())
        skipped += stream.skipped
    assert skipped == spec.n_malformed
    assert loaded == spec.n_parseable


def test_config_is_loadable_and_points_at_files(tmp_path):
    spec = generate_corpus(tmp_path, seed=0)
    config = load_config(spec.config_path)
    assert config.llm.mode == "mock"
    assert config.tokenizer == "reference"
    assert config.scorer == "stopword"
    assert len(config.sources) == 5
    for src in config.sources:
        assert (tmp_path / src.path).is_file() or src.path.startswith(str(tmp_path))
    assert config.benchmarks
    assert spec.n_english_valid == 3_980
    assert spec.n_french_valid == 800


def test_benchmark_questions_are_planted_in_sources(tmp_path):
    spec = generate_corpus(tmp_path, seed=0)
    config = load_config(spec.config_path)
    tok = ReferenceTokenizer()
    bench = {
        ln.strip()
        for ln in spec.benchmark_path.read_text(encoding="utf-8").splitlines()
        if ln.strip()
    }
    assert len(bench) >= spec.n_contaminated
    questions = set()
    for src in config.sources:
        for sample in load_corpus(src.path, src.schema, tokenizer=tok):
            questions.add(sample.question_text)
    assert len(bench & questions) == spec.n_contaminated
