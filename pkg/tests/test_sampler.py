from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from duocorpus import (
    CurationConfig,
    InfeasibleCorpusError,
    Language,
    build_bilingual_dataset,
    check_distribution,
    expected_reasoning_count,
    solve_reasoning_weight,
    weighted_sample_without_replacement,
)
from duocorpus.llm import AnnotationError
from duocorpus.sampler import (
    AuditLog,
    PoolExhaustedError,
    WeightedPool,
    is_reasoning,
    make_pool,
)

from oracles import enumerate_inclusion_probs, recursive_expected_reasoning
from util import en_daily_sample, en_reasoning_sample, fr_daily_sample, fr_reasoning_sample


def fake_translate(sample):
    out = replace(
        sample,
        id=f"tr-{sample.id}",
        language=Language.FR,
        lineage=sample.id,
        purity_score=None,
    )
    out.provenance_flags = sample.provenance_flags | {"translated"}
    return out


def test_weighted_pool_validation():
    items = [en_daily_sample(i) for i in range(2)]
    with pytest.raises(ValueError, match="parallel"):
        WeightedPool(items, np.array([1.0]))
    with pytest.raises(ValueError, match="positive"):
        WeightedPool(items, np.array([1.0, 0.0]))


def test_make_pool_weights_by_difficulty():
    config = CurationConfig(w_reasoning=2.5)
    samples = [en_reasoning_sample(0), en_daily_sample(0)]
    pool = make_pool(samples, config, 2.5)
    assert pool.weights.tolist() == [2.5, 1.0]


def test_is_reasoning_by_task_type():
    config = CurationConfig(weight_key="task_type")
    sample = en_daily_sample(0, task_type="mathematical_reasoning")
    assert is_reasoning(sample, config)
    assert not is_reasoning(en_daily_sample(1, task_type="creative_generation"), config)


def test_draw_basics():
    samples = [en_daily_sample(i) for i in range(6)]
    pool = WeightedPool(samples, np.ones(6))
    rng = np.random.default_rng(0)
    assert weighted_sample_without_replacement(pool, 0, rng) == []
    drawn = weighted_sample_without_replacement(pool, 6, rng)
    assert sorted(s.id for s in drawn) == sorted(s.id for s in samples)
    with pytest.raises(PoolExhaustedError):
        weighted_sample_without_replacement(pool, 7, rng)


def test_draw_determinism_and_seed_sensitivity():
    samples = [en_daily_sample(i) for i in range(30)]
    pool = WeightedPool(samples, np.linspace(1, 4, 30))
    a = weighted_sample_without_replacement(pool, 10, np.random.default_rng(5))
    b = weighted_sample_without_replacement(pool, 10, np.random.default_rng(5))
    c = weighted_sample_without_replacement(pool, 10, np.random.default_rng(6))
    assert [s.id for s in a] == [s.id for s in b]
    assert [s.id for s in a] != [s.id for s in c]


def test_audit_log_records_draws(tmp_path):
    samples = [en_daily_sample(i) for i in range(4)]
    pool = WeightedPool(samples, np.array([4.0, 3.0, 2.0, 1.0]))
    audit = AuditLog()
    drawn = weighted_sample_without_replacement(
        pool, 3, np.random.default_rng(1), audit=audit, pool_name="demo"
    )
    assert [e["seed_counter"] for e in audit.entries] == [0, 1, 2]
    assert [e["draw_index"] for e in audit.entries] == [0, 1, 2]
    assert [e["sample_id"] for e in audit.entries] == [s.id for s in drawn]
    assert all(e["pool"] == "demo" for e in audit.entries)

    path = tmp_path / "audit.jsonl"
    audit.write(path)
    assert len(path.read_text(encoding="utf-8").splitlines()) == 3


def test_inclusion_frequencies_match_enumeration():
    # empirical inclusion rate per item vs exact enumeration, 3-sigma bound
    samples = [en_daily_sample(i) for i in range(5)]
    weights = [5.0, 3.0, 1.0, 1.0, 2.0]
    n_draws = 2
    trials = 20_000
    pool = WeightedPool(samples, np.array(weights))
    hits = {s.id: 0 for s in samples}
    for seed in range(trials):
        for s in weighted_sample_without_replacement(
            pool, n_draws, np.random.default_rng(seed)
        ):
            hits[s.id] += 1
    exact = enumerate_inclusion_probs(weights, n_draws)
    for sample, p in zip(samples, exact):
        freq = hits[sample.id] / trials
        sigma = math.sqrt(p * (1 - p) / trials)
        assert abs(freq - p) <= 3 * sigma, (sample.id, freq, p)


def test_expected_reasoning_count_matches_recursion():
    for r, o, draws, w in [
        (3, 4, 5, 1.5),
        (5, 5, 10, 2.0),
        (10, 2, 6, 0.5),
        (1, 9, 4, 7.0),
        (6, 6, 1, 3.0),
    ]:
        dp = expected_reasoning_count(r, o, draws, w)
        rec = recursive_expected_reasoning(r, o, draws, w)
        assert dp == pytest.approx(rec, abs=1e-9), (r, o, draws, w)


def test_expected_reasoning_count_edges():
    assert expected_reasoning_count(5, 5, 0, 2.0) == 0.0
    assert expected_reasoning_count(0, 5, 3, 2.0) == 0.0
    # unit weight reduces to the hypergeometric mean draws * R/(R+O)
    assert expected_reasoning_count(10, 10, 4, 1.0) == pytest.approx(2.0)
    # drawing the whole pool yields every reasoning item
    assert expected_reasoning_count(3, 2, 5, 4.2) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        expected_reasoning_count(2, 2, 5, 1.0)


def test_solve_reasoning_weight_hits_target():
    w = solve_reasoning_weight(40, 60, 50, 30.0)
    assert expected_reasoning_count(40, 60, 50, w) == pytest.approx(30.0, abs=1e-6)
    assert w > 1.0  # pool is reasoning-light for a 60% share


def test_solve_reasoning_weight_below_one_for_heavy_pool():
    w = solve_reasoning_weight(80, 20, 50, 30.0)
    assert w < 1.0
    assert expected_reasoning_count(80, 20, 50, w) == pytest.approx(30.0, abs=1e-6)


def test_solve_reasoning_weight_clamps(caplog):
    with caplog.at_level("WARNING"):
        hi = solve_reasoning_weight(10, 90, 50, 49.0)  # nearly all draws reasoning
    assert hi == 1e3
    assert any("clamped" in r.message for r in caplog.records)

    caplog.clear()
    with caplog.at_level("WARNING"):
        lo = solve_reasoning_weight(90, 10, 50, 1.0)
    assert lo == 1e-3


def test_solve_reasoning_weight_degenerate_pools():
    assert solve_reasoning_weight(0, 10, 5, 3.0) == 1.0
    assert solve_reasoning_weight(10, 0, 5, 3.0) == 1.0
    assert solve_reasoning_weight(10, 10, 0, 0.0) == 1.0


def _pools(n_en_reason, n_en_daily, n_fr_reason, n_fr_daily):
    english = [en_reasoning_sample(i) for i in range(n_en_reason)] + [
        en_daily_sample(i) for i in range(n_en_daily)
    ]
    french = [fr_reasoning_sample(i) for i in range(n_fr_reason)] + [
        fr_daily_sample(i) for i in range(n_fr_daily)
    ]
    return english, french


def test_build_without_shortfall():
    english, french = _pools(30, 30, 25, 25)
    config = CurationConfig(target_per_language=20, p_reasoning=0.6, seed=3)
    result = build_bilingual_dataset(english, french, config)
    assert len(result.english) == 20
    assert len(result.french) == 20
    assert result.translation_requests == 0
    assert set(result.solved_weights) == {"french", "english"}
    assert all(s.language is Language.FR for s in result.french)
    assert all(s.language is Language.EN for s in result.english)
    # no sample straddles both subsets
    assert not {s.id for s in result.english} & {s.id for s in result.french}


def test_shortfall_translates_exact_gap():
    english, french = _pools(30, 30, 7, 6)
    config = CurationConfig(target_per_language=20, p_reasoning=0.6, seed=3)
    calls = []

    def counting_translate(sample):
        calls.append(sample.id)
        return fake_translate(sample)

    result = build_bilingual_dataset(english, french, config, translate=counting_translate)
    assert result.translation_requests == 7  # 20 - 13
    assert len(calls) == 7
    assert result.translation_failures == 0
    assert len(result.french) == 20
    assert len(result.english) == 20

    translated = [s for s in result.french if s.lineage]
    assert len(translated) == 7
    originals = {s.lineage for s in translated}
    # translated originals left the English pool entirely
    assert not originals & {s.id for s in result.english}
    assert set(result.solved_weights) == {"translation", "english"}


def test_shortfall_keeps_all_french():
    english, french = _pools(30, 30, 7, 6)
    config = CurationConfig(target_per_language=20, seed=0)
    result = build_bilingual_dataset(english, french, config, translate=fake_translate)
    french_ids = {s.id for s in french}
    assert french_ids <= {s.id for s in result.french}


def test_failed_translation_draws_replacement():
    english, french = _pools(20, 20, 4, 3)
    config = CurationConfig(target_per_language=10, seed=1)
    state = {"failed": False}

    def flaky_translate(sample):
        if not state["failed"]:
            state["failed"] = True
            raise AnnotationError("upstream hiccup")
        return fake_translate(sample)

    result = build_bilingual_dataset(english, french, config, translate=flaky_translate)
    assert result.translation_failures == 1
    assert result.translation_requests == 4  # 3 shortfall + 1 replacement
    assert len(result.french) == 10
    assert len(result.english) == 10


def test_invalid_translation_rejected_by_validator():
    english, french = _pools(20, 20, 4, 3)
    config = CurationConfig(target_per_language=10, seed=1)
    rejected = []

    def validate(sample):
        if not rejected:
            rejected.append(sample.id)
            return False
        return True

    result = build_bilingual_dataset(
        english, french, config, translate=fake_translate, validate=validate
    )
    assert result.translation_failures == 1
    assert result.translation_requests == 4
    assert rejected[0] not in {s.id for s in result.french}


def test_all_translations_failing_exhausts_pool():
    def always_fail(sample):
        raise AnnotationError("never works")

    english, french = _pools(6, 6, 2, 1)
    config = CurationConfig(target_per_language=5, seed=0)
    with pytest.raises(PoolExhaustedError):
        build_bilingual_dataset(english, french, config, translate=always_fail)


def test_infeasible_pools():
    config = CurationConfig(target_per_language=10)
    english, french = _pools(6, 6, 2, 2)  # shortfall 6 needs 16 English
    with pytest.raises(InfeasibleCorpusError, match=r"\|E\|=12"):
        build_bilingual_dataset(english, french, config, translate=fake_translate)

    english, french = _pools(5, 5, 5, 4)  # 19 total < 2 * 10
    with pytest.raises(InfeasibleCorpusError):
        build_bilingual_dataset(english, french, config, translate=fake_translate)


def test_shortfall_without_translator_raises():
    english, french = _pools(20, 20, 2, 2)
    config = CurationConfig(target_per_language=10)
    with pytest.raises(ValueError, match="translate"):
        build_bilingual_dataset(english, french, config)


def test_translation_and_original_never_coexist():
    french = [fr_daily_sample(i) for i in range(4)]
    english = [en_daily_sample(i) for i in range(5)]
    pre_translated = fake_translate(english[0])
    with pytest.raises(RuntimeError, match="both selected"):
        build_bilingual_dataset(
            english,
            french + [pre_translated],
            CurationConfig(target_per_language=5, seed=0),
        )


def test_selection_is_seed_deterministic():
    english, french = _pools(40, 40, 9, 8)
    config = CurationConfig(target_per_language=25, seed=11)
    a = build_bilingual_dataset(english, french, config, translate=fake_translate)
    b = build_bilingual_dataset(english, french, config, translate=fake_translate)
    assert [s.id for s in a.english] == [s.id for s in b.english]
    assert [s.id for s in a.french] == [s.id for s in b.french]
    assert [e for e in a.audit.entries] == [e for e in b.audit.entries]


def test_check_distribution_bands():
    config = CurationConfig(p_reasoning=0.6, distribution_band=0.05)
    subsets = {
        "en": [en_reasoning_sample(i) for i in range(6)] + [en_daily_sample(i) for i in range(4)],
        "fr": [fr_reasoning_sample(i) for i in range(5)] + [fr_daily_sample(i) for i in range(5)],
    }
    report = check_distribution(subsets, config)
    assert report.passed is False  # fr sits at 0.50, outside the 5pp band
    by_lang = {r.language: r for r in report.languages}
    assert by_lang["en"].share == 0.6
    assert by_lang["en"].within_band
    assert by_lang["fr"].share == 0.5
    assert not by_lang["fr"].within_band

    subsets["fr"] = subsets["en"]
    assert check_distribution(subsets, config).passed is True


def test_check_distribution_empty_subset():
    report = check_distribution({"en": []}, CurationConfig())
    assert report.passed is False
    assert report.languages[0].error == "empty subset"


def test_check_distribution_counts_task_types():
    config = CurationConfig()
    samples = [
        en_daily_sample(0, task_type="analysis"),
        en_daily_sample(1, task_type="analysis"),
        en_daily_sample(2),
    ]
    report = check_distribution({"en": samples}, config)
    assert report.languages[0].task_type_counts == {"analysis": 2, "unlabeled": 1}
