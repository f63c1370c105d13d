"""Training tables, discretization, rule compilation and classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BLUE, GREEN, RED, halves, solid
from roughseg.classify import (
    Discretizer,
    LabelsFile,
    accuracy,
    build_decision_table,
    classify_image,
    classify_pixel,
    cluster_majority,
    format_rule,
    load_rules_json,
    save_rules_json,
    save_rules_text,
)
from roughseg.colorspace import ClusteringParams, HsiImage, HsiPixel
from roughseg.exceptions import DataError
from roughseg.grid import rough_cluster
from roughseg.raster import LabelRaster
from roughseg.roughset import AVPair, Rule, induce_rules, lower_approx, indiscernibility_classes, concepts


def two_cluster_setup(image=None, bins=8):
    image = image if image is not None else halves(16, 16, RED, BLUE)
    cmap, _ = rough_cluster(image, ClusteringParams(0.05, grid_n=4))
    hsi = HsiImage.from_raster(image)
    labels = LabelsFile({0: "water", 1: "land"})
    disc = Discretizer(bins)
    return image, hsi, cmap, labels, disc


def test_discretizer_bins_and_edges():
    disc = Discretizer(8)
    assert disc.bin_pixel(HsiPixel(0.0, 0.0, 0.0)) == (0, 0, 0)
    assert disc.bin_pixel(HsiPixel(359.999, 1.0, 1.0)) == (7, 7, 7)
    assert disc.bin_pixel(HsiPixel(45.0, 0.5, 0.999)) == (1, 4, 7)
    # right-open bins except the last one
    assert disc.bin_pixel(HsiPixel(44.999999, 0.125, 0.25)) == (0, 1, 2)


@given(
    st.floats(0, 359.9999999, allow_nan=False),
    st.floats(0, 1, allow_nan=False),
    st.floats(0, 1, allow_nan=False),
    st.integers(1, 16),
)
@settings(max_examples=300)
def test_discretizer_totality(h, s, i, bins):
    disc = Discretizer(bins)
    hb, sb, ib = disc.bin_pixel(HsiPixel(h, s, i))
    for b in (hb, sb, ib):
        assert 0 <= b < bins


def test_discretizer_scalar_matches_planes():
    rng = np.random.default_rng(4)
    from roughseg.raster import ImageRaster

    image = ImageRaster(9, 7, rng.integers(0, 256, (63, 3), dtype=np.uint8))
    hsi = HsiImage.from_raster(image)
    disc = Discretizer(8)
    hb, sb, ib = disc.bin_planes(hsi)
    for idx in range(hsi.n_pixels):
        assert disc.bin_pixel(hsi.pixel(idx)) == (int(hb[idx]), int(sb[idx]), int(ib[idx]))


def test_labels_file_parse_and_validation(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("# comment\n0 water\n1 land\n")
    labels = LabelsFile.load(path)
    assert labels.entries == {0: "water", 1: "land"}
    with pytest.raises(DataError, match="duplicate cluster id"):
        LabelsFile.parse("0 water\n0 land\n")
    with pytest.raises(DataError, match="reserved"):
        LabelsFile.parse("0 unclassified\n")
    with pytest.raises(DataError, match="expected"):
        LabelsFile.parse("0 two words\n")


def test_build_decision_table_row_count():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    table = build_decision_table(hsi, cmap, labels, disc)
    assert table.n_rows == 256
    assert table.attributes == ("h_bin", "s_bin", "i_bin")
    assert set(table.decisions) == {0, 1}
    assert table.decision_label(0) == "water"


def test_build_decision_table_errors():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    with pytest.raises(DataError, match="unknown cluster id 7"):
        build_decision_table(hsi, cmap, LabelsFile({7: "x", 0: "y"}), disc)
    with pytest.raises(DataError, match="no labeled clusters"):
        build_decision_table(hsi, cmap, LabelsFile({}), disc)
    with pytest.raises(DataError, match="two distinct class names"):
        build_decision_table(hsi, cmap, LabelsFile({0: "same", 1: "same"}), disc)


def test_same_bins_different_labels_is_inconsistent():
    # two clusters whose colors land in identical bins but carry different
    # labels produce an inconsistent table: empty lower approximations
    image = halves(16, 16, (255, 0, 0), (230, 25, 25))  # distance ~0.30, same 2-bins
    image_hsi = HsiImage.from_raster(image)
    cmap, _ = rough_cluster(image, ClusteringParams(0.1, grid_n=4))
    assert len(cmap.clusters) == 2
    table = build_decision_table(
        image_hsi, cmap, LabelsFile({0: "water", 1: "land"}), Discretizer(2)
    )
    partition = indiscernibility_classes(table, table.attributes)
    for concept in concepts(table):
        assert lower_approx(concept.members, partition) != concept.members
        assert lower_approx(concept.members, partition) == frozenset()


def test_classify_pixel_single_rule():
    rules = [Rule((AVPair("h_bin", 3),), ("class", 0), True, 5, 5, "water")]
    disc = Discretizer(8)
    p = HsiPixel(170.0, 0.2, 0.2)  # h_bin 3
    assert classify_pixel(p, rules, disc) == "water"
    p2 = HsiPixel(300.0, 0.2, 0.2)  # h_bin 6: no full match, partial votes win
    assert classify_pixel(p2, rules, disc) is None


def test_classify_pixel_certain_beats_possible():
    disc = Discretizer(8)
    p = HsiPixel(170.0, 0.2, 0.2)
    hb, sb, ib = disc.bin_pixel(p)
    rules = [
        Rule((AVPair("h_bin", hb),), ("class", 0), False, 50, 50, "possible_class"),
        Rule((AVPair("s_bin", sb),), ("class", 1), True, 1, 1, "certain_class"),
    ]
    assert classify_pixel(p, rules, disc) == "certain_class"


def test_classify_pixel_strength_voting_and_order_tie():
    disc = Discretizer(8)
    p = HsiPixel(170.0, 0.2, 0.2)
    hb, sb, ib = disc.bin_pixel(p)
    rules = [
        Rule((AVPair("h_bin", hb),), ("class", 0), True, 2, 2, "a"),
        Rule((AVPair("s_bin", sb),), ("class", 1), True, 3, 3, "b"),
    ]
    assert classify_pixel(p, rules, disc) == "b"  # higher summed strength
    rules_tie = [
        Rule((AVPair("h_bin", hb),), ("class", 0), True, 3, 3, "a"),
        Rule((AVPair("s_bin", sb),), ("class", 1), True, 3, 3, "b"),
    ]
    assert classify_pixel(p, rules_tie, disc) == "a"  # first in rule order


def test_classify_pixel_partial_match_weights():
    # rule 1: 1 of 2 conditions, strength 4 -> weight 2.0
    # rule 2: 1 of 3 conditions, strength 3 -> weight 1.0
    disc = Discretizer(8)
    p = HsiPixel(170.0, 0.2, 0.2)
    hb, sb, ib = disc.bin_pixel(p)
    other = (hb + 1) % 8
    rules = [
        Rule((AVPair("h_bin", hb), AVPair("s_bin", other)), ("class", 0), True, 4, 4, "first"),
        Rule(
            (AVPair("h_bin", other), AVPair("s_bin", sb), AVPair("i_bin", other)),
            ("class", 1),
            True,
            3,
            3,
            "second",
        ),
    ]
    assert classify_pixel(p, rules, disc) == "first"


def test_classify_pixel_empty_rules_rejected():
    with pytest.raises(DataError, match="empty rule list"):
        classify_pixel(HsiPixel(0.0, 0.0, 0.0), [], Discretizer(8))


def test_training_fidelity_consistent_case():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    table = build_decision_table(hsi, cmap, labels, disc)
    rules = induce_rules(table)
    assert all(rule.certain for rule in rules)
    predicted = classify_image(image, rules, disc)
    # every training pixel keeps its training label
    for info in cmap.clusters:
        want = labels.entries[info.cluster_id]
        got = {predicted.name_of(int(v)) for v in predicted.labels[cmap.pixels_of(info.cluster_id)]}
        assert got == {want}


def test_classify_image_matches_classify_pixel():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    rules = induce_rules(build_decision_table(hsi, cmap, labels, disc))
    predicted = classify_image(image, rules, disc)
    rng = np.random.default_rng(1)
    for idx in rng.choice(hsi.n_pixels, 32, replace=False).tolist():
        assert predicted.name_of(int(predicted.labels[idx])) == classify_pixel(
            hsi.pixel(idx), rules, disc
        )


def test_unseen_colors_stay_unclassified():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    rules = induce_rules(build_decision_table(hsi, cmap, labels, disc))
    # green shares no bin with red or blue training pixels under 8 bins
    unseen = solid(4, 4, GREEN)
    predicted = classify_image(unseen, rules, disc)
    assert (predicted.labels == predicted.unclassified_id).all()


def test_accuracy_examples():
    palette = {0: ("a", (255, 0, 0)), 1: ("b", (0, 255, 0))}
    mk = lambda ids: LabelRaster(2, 2, np.array(ids, dtype=np.int32), palette, 9)
    assert accuracy(mk([0, 0, 1, 1]), mk([0, 0, 1, 1])) == 1.0
    assert accuracy(mk([0, 0, 0, 0]), mk([1, 1, 1, 1])) == 0.0
    assert accuracy(mk([0, 0, 1, 0]), mk([0, 0, 1, 1])) == 0.75
    # unclassified matches only unclassified
    assert accuracy(mk([9, 0, 1, 1]), mk([9, 0, 1, 1])) == 1.0
    assert accuracy(mk([9, 0, 1, 1]), mk([0, 0, 1, 1])) == 0.75
    with pytest.raises(DataError, match="dimension mismatch"):
        accuracy(mk([0, 0, 1, 1]), LabelRaster(1, 2, np.array([0, 1], dtype=np.int32), palette, 9))


def test_accuracy_matches_by_name_not_id():
    pred = LabelRaster(
        2, 1, np.array([0, 1], dtype=np.int32), {0: ("a", (9, 0, 0)), 1: ("b", (0, 9, 0))}, 5
    )
    truth = LabelRaster(
        2, 1, np.array([1, 0], dtype=np.int32), {1: ("a", (1, 1, 1)), 0: ("b", (2, 2, 2))}, 7
    )
    assert accuracy(pred, truth) == 1.0


def test_cluster_majority():
    image, hsi, cmap, labels, disc = two_cluster_setup()
    rules = induce_rules(build_decision_table(hsi, cmap, labels, disc))
    predicted = classify_image(image, rules, disc)
    majorities = cluster_majority(cmap, predicted)
    assert [(cid, name) for cid, name, _, _ in majorities] == [(0, "water"), (1, "land")]
    for _, _, count, size in majorities:
        assert count == size == 128


def test_rules_text_format_and_json_round_trip(tmp_path):
    image, hsi, cmap, labels, disc = two_cluster_setup()
    rules = induce_rules(build_decision_table(hsi, cmap, labels, disc))
    line = format_rule(rules[0])
    assert line.startswith("IF ")
    assert " THEN class=" in line and "support=" in line
    text_path = tmp_path / "rules.txt"
    json_path = tmp_path / "rules.json"
    save_rules_text(rules, text_path)
    save_rules_json(rules, disc, json_path)
    assert len(text_path.read_text().splitlines()) == len(rules)
    loaded, loaded_disc = load_rules_json(json_path)
    assert loaded_disc == disc
    assert [(r.conditions, r.label(), r.certain, r.support) for r in loaded] == [
        (r.conditions, r.label(), r.certain, r.support) for r in rules
    ]
    # loaded rules classify identically
    a = classify_image(image, rules, disc)
    b = classify_image(image, loaded, loaded_disc)
    assert np.array_equal(a.labels, b.labels)


def test_rules_json_zero_rules_rejected(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text('{"attributes": [], "bins_per_channel": 8, "classes": [], "rules": []}')
    with pytest.raises(DataError, match="zero rules"):
        load_rules_json(path)
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(DataError, match="unparseable"):
        load_rules_json(bad)
