import numpy as np
import pytest

import mdpm


def running_example():
    db = mdpm.TransactionDatabase(dim=5, k=5)
    for t in ([3, 4], [1, 2, 4], [1, 4], [1, 3, 4], [1, 2, 3, 4]):
        db.add(t, positive=True)
    return db


def small_dataset(seed=0):
    spec = mdpm.SynthSpec()
    spec.categories = 3
    spec.images_per_category = 30
    spec.seed = seed
    return spec, mdpm.generate_dataset(spec)


def test_running_example_counts():
    db = running_example()
    assert mdpm.support(db, [1, 4]) == 0.8
    assert mdpm.confidence(db, [1, 4], 3) == 0.5
    assert len(db) == 5
    assert db.transaction(0) == [3, 4, db.pos_item]


def test_mining_is_strict_and_sorted():
    db = running_example()
    patterns = mdpm.mine_rules(db, supp_min="0.75", conf_min="0.9", min_len=2, max_len=2)
    assert [p.items for p in patterns] == [[1, 4]]
    assert patterns[0].support == 0.8
    assert patterns[0].confidence == 1.0
    # 0.8 does not exceed 0.8.
    assert mdpm.mine_rules(db, supp_min="0.8", conf_min="0.9", min_len=2, max_len=2) == []


def test_invalid_threshold_raises():
    with pytest.raises(mdpm.ValidationError, match="supp-min"):
        mdpm.mine_rules(running_example(), supp_min="1.5")


def test_top_k_indices_ties_to_lower_index():
    v = np.zeros(4096, dtype=np.float32)
    v[[2, 99, 4095]] = [9, 8, 7]
    assert mdpm.top_k_indices(v, 3) == [2, 99, 4095]
    assert mdpm.top_k_indices(np.array([3, 1, 1, 0], dtype=np.float32), 2) == [0, 1]


def test_patch_grid_matches_formula():
    grid = mdpm.sample_patch_grid(256, 256, 128, 32)
    assert len(grid) == 25
    assert (grid[0].x, grid[0].y) == (0, 0)
    assert (grid[-1].x, grid[-1].y) == (128, 128)
    assert mdpm.sample_patch_grid(100, 100, 128, 32) == []


def test_featfile_round_trip(tmp_path):
    _, data = small_dataset()
    path = tmp_path / "feats.bin"
    mdpm.write_featfile(data.store, path)
    assert path.stat().st_size == 20 + len(data.store) * (20 + 4 * data.store.dim)
    back = mdpm.read_featfile(path)
    assert back == data.store
    assert back.activations().shape == (len(back), back.dim)
    assert (back.activations() >= 0).all()


def test_bad_file_raises(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(mdpm.FormatError):
        mdpm.read_featfile(path)


def test_synthetic_recovery_and_encoding():
    spec, data = small_dataset()
    mined = []
    for category in range(spec.categories):
        mined += mdpm.mine_category(data.store, k=8, target=category, supp_min="0.01", conf_min="0.6")
    report = mdpm.planted_recovery_report(mined, data.concepts)
    assert report["recall"] == 1.0
    assert report["precision"] >= 0.95

    selected = []
    for category in range(spec.categories):
        patterns = [p for p in mined if p.category == category]
        elements = mdpm.retrieve_category(data.store, 8, category, patterns)
        top = mdpm.select_top_patterns(elements, 5)
        assert [e.coverage for e in top] == sorted((e.coverage for e in top), reverse=True)
        selected += [e.pattern for e in top]

    ids, labels, x = mdpm.encode_store_bop(data.store, selected, image_w=256, image_h=256)
    assert x.shape == (data.store.image_count, 5 * spec.categories * 5)
    assert list(ids) == sorted(ids)

    model = mdpm.train_ovr(x, list(labels))
    assert model.categories == [0, 1, 2]
    assert mdpm.accuracy(model, x, list(labels)) == 1.0


def test_merge_and_element_encoding():
    spec, data = small_dataset()
    patterns = mdpm.mine_category(data.store, k=8, target=0, supp_min="0.01", conf_min="0.6")
    elements = mdpm.select_top_patterns(mdpm.retrieve_category(data.store, 8, 0, patterns), 6)
    merged, detectors = mdpm.merge_category(elements, data.store, 0, threshold=1e9)
    # Nothing clears an unreachable threshold: every element stands alone.
    assert len(merged) == len(elements) == len(detectors)
    assert sorted(s for m in merged for s in m.sources) == list(range(len(elements)))
    ids, labels, x = mdpm.encode_store_boe([data.store], detectors[:2])
    assert x.shape == (data.store.image_count, 2 * 5)


def test_average_precision_examples():
    assert mdpm.average_precision([0.9, 0.1], [True, False]) == 1.0
    assert mdpm.average_precision([0.9, 0.1], [False, True]) == 0.5
    assert mdpm.average_precision([0.3, 0.2, 0.1], [True, True, True]) == 1.0
    with pytest.raises(mdpm.UndefinedError):
        mdpm.average_precision([1.0, 2.0], [False, False])


def test_context_rules():
    assert mdpm.classify_firing(0.05, 0.0, 0.95) == mdpm.FiringType.SCENE_CONTEXT
    assert mdpm.classify_firing(0.2, 0.3, 0.5) == mdpm.FiringType.OBJECT_CONTEXT
    assert mdpm.classify_firing(0.6, 0.1, 0.3) == mdpm.FiringType.GROUND_TRUTH_OBJECT
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[0, 0:5] = 1
    gt, ot, sc = mdpm.overlap_ratios(mdpm.PatchGeometry(0, 0, 10, 10), mask)
    assert (gt, ot, sc) == (0.05, 0.0, 0.95)


def test_generation_is_deterministic():
    _, a = small_dataset(seed=3)
    _, b = small_dataset(seed=3)
    assert a.store == b.store
    assert a.record_concept == b.record_concept
