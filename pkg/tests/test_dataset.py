import numpy as np
import pytest

from simvib.dataset import (
    RecordingFormat,
    SelectionRule,
    SplitSpec,
    load_and_segment,
    load_manifest,
    read_recording,
    split_references,
    synth_dataset,
    write_recording,
)
from simvib.errors import ManifestError, SplitError


def write_manifest(tmp_path, entries, version="version 1", name="manifest.txt"):
    lines = [version] if version else []
    lines += entries
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def write_rec(tmp_path, name, samples, fmt=RecordingFormat.F64LE):
    write_recording(tmp_path / name, np.asarray(samples, dtype=float), fmt)
    return name


def entry_line(path, cid, name, rpm=1797, rate=12000, fmt="f64le"):
    return (
        f"entry path={path} class_id={cid} class_name={name} "
        f"motor_speed_rpm={rpm} sample_rate_hz={rate} format={fmt}"
    )


class TestRecordingIo:
    @pytest.mark.parametrize("fmt", [RecordingFormat.TEXT, RecordingFormat.F64LE])
    def test_round_trip_is_bit_exact(self, tmp_path, fmt):
        rng = np.random.default_rng(0)
        samples = np.concatenate(
            [rng.standard_normal(100) * 10.0**rng.integers(-8, 8, 100), [0.0, -0.0]]
        )
        path = tmp_path / "rec.dat"
        write_recording(path, samples, fmt)
        back = read_recording(path, fmt)
        assert back.tobytes() == samples.tobytes()


class TestLoadManifest:
    def test_valid_manifest(self, tmp_path):
        rec = write_rec(tmp_path, "a.f64", np.ones(100))
        path = write_manifest(
            tmp_path,
            [entry_line(rec, 0, "Normal"), entry_line(write_rec(tmp_path, "b.f64", np.ones(50)), 1, "IR-0.007")],
        )
        m = load_manifest(path)
        assert m.n_classes == 2
        assert m.class_names() == {0: "Normal", 1: "IR-0.007"}
        assert m.sample_rate_hz == 12000.0

    def test_empty_entries_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [])
        with pytest.raises(ManifestError, match="empty"):
            load_manifest(path)

    def test_missing_version_rejected(self, tmp_path):
        rec = write_rec(tmp_path, "a.f64", np.ones(10))
        path = write_manifest(tmp_path, [entry_line(rec, 0, "n")], version=None)
        with pytest.raises(ManifestError):
            load_manifest(path)

    def test_unsupported_version_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [], version="version 99")
        with pytest.raises(ManifestError, match="version"):
            load_manifest(path)

    def test_missing_file_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [entry_line("ghost.f64", 0, "n")])
        with pytest.raises(ManifestError, match="ghost"):
            load_manifest(path)

    def test_non_finite_samples_rejected_naming_entry(self, tmp_path):
        rec = write_rec(tmp_path, "bad.f64", [1.0, np.inf, 2.0])
        path = write_manifest(tmp_path, [entry_line(rec, 0, "n")])
        with pytest.raises(ManifestError, match="bad.f64"):
            load_manifest(path)

    def test_duplicate_path_conflicting_labels_rejected(self, tmp_path):
        rec = write_rec(tmp_path, "a.f64", np.ones(10))
        path = write_manifest(
            tmp_path, [entry_line(rec, 0, "n"), entry_line(rec, 1, "m")]
        )
        with pytest.raises(ManifestError, match="conflicting"):
            load_manifest(path)

    def test_non_contiguous_class_ids_rejected(self, tmp_path):
        a = write_rec(tmp_path, "a.f64", np.ones(10))
        b = write_rec(tmp_path, "b.f64", np.ones(10))
        path = write_manifest(
            tmp_path, [entry_line(a, 0, "n"), entry_line(b, 2, "m")]
        )
        with pytest.raises(ManifestError, match="contiguous"):
            load_manifest(path)

    def test_inconsistent_sample_rates_rejected(self, tmp_path):
        a = write_rec(tmp_path, "a.f64", np.ones(10))
        b = write_rec(tmp_path, "b.f64", np.ones(10))
        path = write_manifest(
            tmp_path,
            [entry_line(a, 0, "n", rate=12000), entry_line(b, 1, "m", rate=48000)],
        )
        with pytest.raises(ManifestError, match="sample rates"):
            load_manifest(path)

    def test_unknown_key_rejected(self, tmp_path):
        rec = write_rec(tmp_path, "a.f64", np.ones(10))
        path = write_manifest(tmp_path, [entry_line(rec, 0, "n") + " bogus=1"])
        with pytest.raises(ManifestError, match="bogus"):
            load_manifest(path)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        rec = write_rec(tmp_path, "a.f64", np.ones(10))
        path = write_manifest(
            tmp_path, ["# heading", "", entry_line(rec, 0, "n"), "# tail"]
        )
        assert len(load_manifest(path).entries) == 1


class TestLoadAndSegment:
    def make_manifest(self, tmp_path, lengths_by_class):
        entries = []
        for cid, lengths in lengths_by_class.items():
            for j, n in enumerate(lengths):
                rec = write_rec(
                    tmp_path, f"c{cid}_{j}.f64", np.random.default_rng(cid * 97 + j).standard_normal(n)
                )
                entries.append(entry_line(rec, cid, f"c{cid}", rpm=1797 - 25 * j))
        return load_manifest(write_manifest(tmp_path, entries))

    def test_counts_follow_floor_formula(self, tmp_path):
        m = self.make_manifest(tmp_path, {0: [4000], 1: [2000, 5999]})
        records = load_and_segment(m, 2000)
        assert len(records) == 2 + 1 + 2

    def test_cwru_scale_bookkeeping_totals_3019(self, tmp_path):
        # 39 recordings x 75 windows + 1 recording x 94 windows = 3019 windows,
        # matching the documented corpus total at 2000-point segmentation
        lengths = {cid: [150_900, 150_900, 150_900, 150_900] for cid in range(10)}
        lengths[9] = [150_900, 150_900, 150_900, 188_100]
        m = self.make_manifest(tmp_path, lengths)
        records = load_and_segment(m, 2000)
        assert len(records) == 3019

    def test_segment_duration_at_12khz(self, tmp_path):
        m = self.make_manifest(tmp_path, {0: [2000], 1: [2000]})
        rec = load_and_segment(m, 2000)[0]
        duration = len(rec.segment) / rec.segment.sample_rate_hz
        assert duration == pytest.approx(0.1667, abs=5e-4)

    def test_labels_and_speed_tagging(self, tmp_path):
        m = self.make_manifest(tmp_path, {0: [4000], 1: [4000]})
        records = load_and_segment(m, 2000)
        assert {r.label for r in records} == {0, 1}
        assert all(r.motor_speed_rpm == 1797 for r in records)
        assert len({r.uid for r in records}) == len(records)

    def test_short_recording_skipped_with_warning(self, tmp_path):
        m = self.make_manifest(tmp_path, {0: [2000], 1: [500]})
        with pytest.warns(UserWarning, match="skipped"):
            records = load_and_segment(m, 2000)
        assert len(records) == 1


class TestSplitReferences:
    def make_records(self, tmp_path, n_classes=10, n_speeds=4, windows_each=2):
        manifest = synth_dataset(
            tmp_path / "ds",
            n_classes=n_classes,
            per_class=n_speeds * windows_each,
            seed=5,
            n_speeds=n_speeds,
            verify_separable=False,
        )
        return load_and_segment(manifest, 2000)

    def test_protocol_counts_forty_refs(self, tmp_path):
        records = self.make_records(tmp_path)
        refs, tests = split_references(records, SplitSpec())
        assert len(refs) == 40
        assert len(tests) == len(records) - 40

    def test_partition_and_disjointness(self, tmp_path):
        records = self.make_records(tmp_path, n_classes=3)
        refs, tests = split_references(records, SplitSpec())
        ref_uids = {r.uid for r in refs}
        test_uids = {t.uid for t in tests}
        assert ref_uids.isdisjoint(test_uids)
        assert ref_uids | test_uids == {r.uid for r in records}

    def test_first_rule_picks_earliest(self, tmp_path):
        records = self.make_records(tmp_path, n_classes=2)
        refs, _ = split_references(records, SplitSpec())
        assert all(r.segment_index == 0 for r in refs)

    def test_seeded_random_is_deterministic(self, tmp_path):
        records = self.make_records(tmp_path, n_classes=2)
        spec = SplitSpec(selection=SelectionRule.SEEDED_RANDOM, seed=77)
        refs_a, _ = split_references(records, spec)
        refs_b, _ = split_references(records, spec)
        assert [r.uid for r in refs_a] == [r.uid for r in refs_b]
        other, _ = split_references(
            records, SplitSpec(selection=SelectionRule.SEEDED_RANDOM, seed=78)
        )
        assert {r.uid for r in other} != {r.uid for r in refs_a} or True  # may collide

    def test_insufficient_segments_raise_naming_pair(self, tmp_path):
        records = self.make_records(tmp_path, n_classes=2, windows_each=1)
        with pytest.raises(SplitError, match="class"):
            split_references(records, SplitSpec(refs_per_class_per_speed=2))


class TestSynthDataset:
    def test_counting_example(self, tmp_path):
        manifest = synth_dataset(
            tmp_path / "ds", n_classes=10, per_class=80, seed=3, verify_separable=False
        )
        records = load_and_segment(manifest, 2000)
        assert len(records) == 800
        assert manifest.n_classes == 10
        assert len(manifest.entries) == 40

    def test_same_seed_bit_identical(self, tmp_path):
        a = synth_dataset(tmp_path / "a", n_classes=3, per_class=8, seed=9, verify_separable=False)
        b = synth_dataset(tmp_path / "b", n_classes=3, per_class=8, seed=9, verify_separable=False)
        for ea, eb in zip(a.entries, b.entries):
            assert ea.path.read_bytes() == eb.path.read_bytes()

    def test_different_seed_differs(self, tmp_path):
        a = synth_dataset(tmp_path / "a", n_classes=2, per_class=4, seed=1, verify_separable=False)
        b = synth_dataset(tmp_path / "b", n_classes=2, per_class=4, seed=2, verify_separable=False)
        assert a.entries[0].path.read_bytes() != b.entries[0].path.read_bytes()

    def test_clean_classes_are_separable_in_spectrum_space(self, tmp_path):
        # nearest clean per-class spectrum reference recovers every label
        synth_dataset(tmp_path / "ds", n_classes=10, per_class=16, seed=4)

    def test_text_format_supported(self, tmp_path):
        manifest = synth_dataset(
            tmp_path / "ds",
            n_classes=2,
            per_class=4,
            seed=6,
            fmt=RecordingFormat.TEXT,
            verify_separable=False,
        )
        assert manifest.entries[0].format is RecordingFormat.TEXT
        records = load_and_segment(manifest, 2000)
        assert len(records) == 8
