import pytest
from hypothesis import given, settings, strategies as st

from cardex.annotations import (
    DatasetConfig,
    SplitSpec,
    parse_dataset_config,
    parse_yolo_label,
    serialize_dataset_config,
    serialize_yolo_label,
    split_dataset,
)
from cardex.errors import ConfigError, ParseError
from cardex.types import DEFAULT_FRONT_SCHEMA, NormBox


class TestYoloLabels:
    def test_parse_basic(self):
        text = "0 0.5 0.5 0.2 0.1\n3 0.25 0.75 0.1 0.1\n"
        entries = parse_yolo_label(text, DEFAULT_FRONT_SCHEMA)
        assert entries == [
            (0, NormBox(0.5, 0.5, 0.2, 0.1)),
            (3, NormBox(0.25, 0.75, 0.1, 0.1)),
        ]

    def test_blank_lines_skipped(self):
        assert parse_yolo_label("\n\n0 0.5 0.5 0.1 0.1\n\n", DEFAULT_FRONT_SCHEMA)

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as exc:
            parse_yolo_label("0 0.5 0.5 0.1 0.1\n1 0.5 0.5\n", DEFAULT_FRONT_SCHEMA)
        assert exc.value.line == 2
        with pytest.raises(ParseError) as exc:
            parse_yolo_label("0 x 0.5 0.1 0.1", DEFAULT_FRONT_SCHEMA)
        assert exc.value.line == 1

    def test_category_gated_by_schema(self):
        with pytest.raises(ParseError):
            parse_yolo_label("9 0.5 0.5 0.1 0.1", DEFAULT_FRONT_SCHEMA)

    def test_degenerate_box_is_a_parse_error(self):
        with pytest.raises(ParseError):
            parse_yolo_label("0 0.5 0.5 0.0 0.1", DEFAULT_FRONT_SCHEMA)

    @given(
        st.lists(
            st.tuples(
                st.integers(0, 4),
                st.floats(0.05, 0.95),
                st.floats(0.05, 0.95),
                st.floats(0.01, 0.5),
                st.floats(0.01, 0.5),
            ),
            max_size=20,
        )
    )
    @settings(max_examples=50)
    def test_round_trip_within_1e6(self, raw):
        entries = [(c, NormBox(cx, cy, w, h)) for c, cx, cy, w, h in raw]
        parsed = parse_yolo_label(serialize_yolo_label(entries), DEFAULT_FRONT_SCHEMA)
        assert len(parsed) == len(entries)
        for (c1, b1), (c2, b2) in zip(entries, parsed):
            assert c1 == c2
            for attr in ("cx", "cy", "w", "h"):
                assert abs(getattr(b1, attr) - getattr(b2, attr)) <= 1e-6


class TestDatasetConfig:
    def test_parse_and_serialize(self):
        cfg = parse_dataset_config("train: data/train\nval: data/val\nnames: [a, b]\nextra: 1\n")
        assert cfg == DatasetConfig("data/train", "data/val", ("a", "b"))
        assert parse_dataset_config(serialize_dataset_config(cfg)) == cfg

    def test_index_mapping_names(self):
        cfg = parse_dataset_config("train: t\nval: v\nnames:\n  1: b\n  0: a\n")
        assert cfg.names == ("a", "b")

    def test_missing_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_dataset_config("train: t\nnames: [a]\n")

    def test_invalid_yaml_rejected(self):
        with pytest.raises(ConfigError):
            parse_dataset_config("train: [unclosed\n")


class TestSplit:
    def test_250_items_at_084_gives_210_40(self):
        items = [f"img{i}" for i in range(250)]
        train, val, warnings = split_dataset(items, SplitSpec(seed=7, train_ratio=0.84))
        assert (len(train), len(val)) == (210, 40)
        assert not warnings

    def test_partition_no_loss_no_overlap(self):
        items = [f"s{i % 3}/img{i}" for i in range(100)]
        train, val, _ = split_dataset(
            items, SplitSpec(seed=1, train_ratio=0.7), stratum_of=lambda s: s.split("/")[0]
        )
        assert sorted(train + val) == sorted(items)
        assert not set(train) & set(val)

    def test_deterministic_per_seed(self):
        items = [f"img{i}" for i in range(50)]
        a = split_dataset(items, SplitSpec(seed=3, train_ratio=0.8))
        b = split_dataset(items, SplitSpec(seed=3, train_ratio=0.8))
        assert a == b
        c = split_dataset(items, SplitSpec(seed=4, train_ratio=0.8))
        assert a[0] != c[0]

    def test_stratified_ratio_per_stratum(self):
        items = [("a", i) for i in range(50)] + [("b", i) for i in range(30)]
        train, val, _ = split_dataset(
            items, SplitSpec(seed=0, train_ratio=0.8), stratum_of=lambda x: x[0]
        )
        assert sum(1 for s, _ in train if s == "a") == 40
        assert sum(1 for s, _ in train if s == "b") == 24

    def test_tiny_stratum_goes_to_train_with_warning(self):
        items = [("solo", 0)] + [("big", i) for i in range(10)]
        train, val, warnings = split_dataset(
            items, SplitSpec(seed=0, train_ratio=0.5), stratum_of=lambda x: x[0]
        )
        assert ("solo", 0) in train
        assert any("solo" in w for w in warnings)

    def test_both_sides_nonempty(self):
        for n in (2, 3, 5):
            train, val, _ = split_dataset(list(range(n)), SplitSpec(seed=0, train_ratio=0.99))
            assert train and val

    def test_empty_input_rejected(self):
        with pytest.raises(ConfigError):
            split_dataset([], SplitSpec(seed=0, train_ratio=0.5))

    def test_ratio_validated(self):
        with pytest.raises(ConfigError):
            SplitSpec(seed=0, train_ratio=1.0)
