"""End-to-end tests of the covhuseg command line."""

import numpy as np
import pytest

from cli.main import main
from engine.experiment import ImprovementExperiment
from engine.mask_io import load_mask, save_image, save_mask
from engine.metrics import read_records_csv
from engine.perturb import DegradeSpec, SynthSpec
from tests.conftest import disk


def _report_row(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "model,split,without,with,increase,increase_pct"
    return lines[1].split(",")


def _write_config(tmp_path, text):
    path = tmp_path / "covhuseg.env"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestProcess:
    def test_empty_directory(self, tmp_path):
        (tmp_path / "in").mkdir()
        assert main(["process", str(tmp_path / "in"), str(tmp_path / "out"), "-q"]) == 0

    def test_missing_directory(self, tmp_path):
        assert main(["process", str(tmp_path / "nope"), str(tmp_path / "out"), "-q"]) == 3

    def test_outputs_contain_inputs(self, mask_dir, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["process", str(mask_dir), str(out), "-q"]) == 0
        for name in ("a.png", "b.png", "c.pgm"):
            before, after = load_mask(mask_dir / name), load_mask(out / name)
            assert (after >= before).all()
        assert load_mask(out / "a.png").sum() > load_mask(mask_dir / "a.png").sum()
        assert "Processed 3 of 3" in capsys.readouterr().out

    def test_corrupt_file_is_a_partial_failure(self, mask_dir, tmp_path, capsys):
        (mask_dir / "bad.png").write_bytes(b"not an image")
        out = tmp_path / "out"
        assert main(["process", str(mask_dir), str(out), "-q"]) == 1
        assert (out / "a.png").is_file()
        assert not (out / "bad.png").exists()
        assert "bad.png" in capsys.readouterr().out

    def test_only_corrupt_files(self, tmp_path):
        (tmp_path / "in").mkdir()
        (tmp_path / "in" / "x.pgm").write_bytes(b"P5\n4 4\n255\n")
        assert main(["process", str(tmp_path / "in"), str(tmp_path / "out"), "-q"]) == 3

    def test_parallel_output_is_identical(self, mask_dir, tmp_path):
        main(["process", str(mask_dir), str(tmp_path / "one"), "-q"])
        main(["process", str(mask_dir), str(tmp_path / "two"), "-q", "--jobs", "2"])
        for name in ("a.png", "b.png", "c.pgm"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_probmap_input(self, tmp_path):
        (tmp_path / "in").mkdir()
        probs = np.zeros((8, 8))
        probs[2:6, 2:6] = 0.8
        probs[3, 3] = 0.2
        save_image(probs, tmp_path / "in" / "p.png")
        assert main(["process", str(tmp_path / "in"), str(tmp_path / "out"), "--probmap", "-q"]) == 0
        out = load_mask(tmp_path / "out" / "p.png")
        assert out.sum() == 16


class TestEvaluate:
    def test_prediction_equal_to_ground_truth(self, mask_dir, tmp_path):
        report = tmp_path / "report.csv"
        code = main(["evaluate", str(mask_dir), "--gt-dir", str(mask_dir),
                     "--report", str(report), "--model", "UNet", "--split", "B", "-q"])
        assert code == 0
        row = _report_row(report)
        assert row[:3] == ["UNet", "B", "1.000"]

    def test_synthetic_pairs_match_the_experiment(self, tmp_path):
        out = tmp_path / "synth"
        assert main(["synth", str(out), "--trials", "6", "--size-range", "5,10", "--canvas", "48x48",
                     "--hole-count", "1", "--seed", "4", "-q"]) == 0
        records_path = tmp_path / "records.csv"
        report = tmp_path / "report.csv"
        assert main(["evaluate", str(out / "pred"), "--gt-dir", str(out / "gt"),
                     "--report", str(report), "--records", str(records_path), "-q"]) == 0

        expected = ImprovementExperiment(
            SynthSpec(size_range=(5, 10), canvas=(48, 48), seed=4), DegradeSpec(hole_count=1), 6
        ).run().records
        got = read_records_csv(records_path)
        assert [r.image_id for r in got] == [r.image_id for r in expected]
        for a, b in zip(got, expected):
            assert a.dice_without == pytest.approx(b.dice_without, abs=1e-11)
            assert a.dice_with == pytest.approx(b.dice_with, abs=1e-11)
        assert float(_report_row(report)[4]) > 0

    def test_dimension_mismatch_is_flagged(self, tmp_path, capsys):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        save_mask(disk(16, 5.0), pred / "a.png")
        save_mask(disk(8, 3.0), gt / "a.png")
        save_mask(disk(8, 3.0), pred / "b.png")
        save_mask(disk(8, 3.0), gt / "b.png")
        code = main(["evaluate", str(pred), "--gt-dir", str(gt), "--report", str(tmp_path / "r.csv"), "-q"])
        assert code == 1
        assert "dimension mismatch" in capsys.readouterr().out

    def test_unpaired_files_are_listed(self, mask_dir, tmp_path, capsys):
        gt = tmp_path / "gt"
        gt.mkdir()
        save_mask(load_mask(mask_dir / "b.png"), gt / "b.png")
        code = main(["evaluate", str(mask_dir), "--gt-dir", str(gt), "--report", str(tmp_path / "r.csv"), "-q"])
        assert code == 1
        assert "Unpaired (2)" in capsys.readouterr().out

    def test_no_pairs(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        save_mask(disk(8, 3.0), pred / "x.png")
        save_mask(disk(8, 3.0), gt / "y.png")
        assert main(["evaluate", str(pred), "--gt-dir", str(gt), "--report", str(tmp_path / "r.csv"), "-q"]) == 3

    def test_ground_truth_source_is_required(self, mask_dir):
        with pytest.raises(SystemExit) as excinfo:
            main(["evaluate", str(mask_dir)])
        assert excinfo.value.code == 2

    def test_reports_are_reproducible(self, mask_dir, tmp_path):
        for run in ("first", "second"):
            out = tmp_path / run
            main(["process", str(mask_dir), str(out / "masks"), "-q"])
            main(["evaluate", str(out / "masks"), "--gt-dir", str(mask_dir),
                  "--report", str(out / "report.csv"), "-q"])
        assert (tmp_path / "first" / "report.csv").read_bytes() == (tmp_path / "second" / "report.csv").read_bytes()


class TestSplitAndNoise:
    def _dataset(self, root):
        for group in ("normal", "DN"):
            for subject in ("s1", "s2", "s3"):
                base = root / group / subject
                (base / "img").mkdir(parents=True)
                (base / "mask").mkdir(parents=True)
                for p in range(4):
                    (base / "img" / f"p{p}_img.png").write_bytes(b"")
                    (base / "mask" / f"p{p}_mask.png").write_bytes(b"")
        return root

    def test_split_is_byte_identical_across_runs(self, tmp_path):
        root = self._dataset(tmp_path / "kpis")
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["split", str(root), str(first), "--split", "C", "--seed", "7", "-q"]) == 0
        assert main(["split", str(root), str(second), "--split", "C", "--seed", "7", "-q"]) == 0
        assert first.read_bytes() == second.read_bytes()
        # 2 of 3 subjects and 2 of 4 patches in each of two groups
        assert len(first.read_text(encoding="utf-8").splitlines()) == 1 + 8

    def test_split_of_empty_root(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["split", str(tmp_path / "empty"), str(tmp_path / "m.csv"), "--split", "A", "-q"]) == 3

    def test_split_manifest_drives_evaluate(self, tmp_path):
        root = tmp_path / "kpis"
        base = root / "DN" / "s1"
        (base / "img").mkdir(parents=True)
        (base / "mask").mkdir(parents=True)
        save_mask(disk(16, 5.0), base / "img" / "p0_img.png")
        save_mask(disk(16, 5.0), base / "mask" / "p0_mask.png")
        manifest = tmp_path / "manifest.csv"
        assert main(["split", str(root), str(manifest), "--split", "A", "-q"]) == 0

        pred = tmp_path / "pred"
        pred.mkdir()
        save_mask(disk(16, 5.0), pred / "p0_mask.png")
        report = tmp_path / "r.csv"
        assert main(["evaluate", str(pred), "--manifest", str(manifest), "--report", str(report), "-q"]) == 0
        assert _report_row(report)[2:4] == ["1.000", "1.000"]

    def test_manifest_masks_sharing_a_name_are_not_paired(self, tmp_path, capsys):
        rows = ["subject_id,group,patch_path,mask_path"]
        for subject, patch in (("s1", "p0"), ("s1", "p1"), ("s2", "p0")):
            base = tmp_path / "kpis" / "DN" / subject
            (base / "mask").mkdir(parents=True, exist_ok=True)
            save_mask(disk(16, 5.0), base / "mask" / f"{patch}_mask.png")
            rows.append(f"{subject},DN,{base / 'img' / f'{patch}_img.png'},{base / 'mask' / f'{patch}_mask.png'}")
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")

        pred = tmp_path / "pred"
        pred.mkdir()
        save_mask(disk(16, 5.0), pred / "p0_mask.png")
        save_mask(disk(16, 5.0), pred / "p1_mask.png")
        records = tmp_path / "records.csv"
        code = main(["evaluate", str(pred), "--manifest", str(manifest), "--report", str(tmp_path / "r.csv"),
                     "--records", str(records), "-q"])
        assert code == 1
        out = capsys.readouterr().out
        assert "Unpaired (2)" in out
        assert "ambiguous" in out
        assert [r.image_id for r in read_records_csv(records)] == ["p1_mask"]

    def test_zero_noise_copies_bytes(self, tmp_path, rng):
        (tmp_path / "in").mkdir()
        save_image(rng.random((16, 16)), tmp_path / "in" / "g.png")
        assert main(["noise", str(tmp_path / "in"), str(tmp_path / "out"), "--std", "0", "-q"]) == 0
        assert (tmp_path / "out" / "g.png").read_bytes() == (tmp_path / "in" / "g.png").read_bytes()

    def test_noise_is_seeded(self, tmp_path):
        (tmp_path / "in").mkdir()
        save_image(np.full((16, 16), 0.5), tmp_path / "in" / "g.png")
        for run in ("a", "b"):
            assert main(["noise", str(tmp_path / "in"), str(tmp_path / run), "--seed", "5", "-q"]) == 0
        assert (tmp_path / "a" / "g.png").read_bytes() == (tmp_path / "b" / "g.png").read_bytes()
        assert (tmp_path / "a" / "g.png").read_bytes() != (tmp_path / "in" / "g.png").read_bytes()

    def test_negative_std_is_a_usage_error(self, tmp_path):
        (tmp_path / "in").mkdir()
        assert main(["noise", str(tmp_path / "in"), str(tmp_path / "out"), "--std", "-1", "-q"]) == 2


class TestConfiguration:
    def test_config_file_sets_options(self, mask_dir, tmp_path):
        config = _write_config(tmp_path, "min_component_area=1000\n")
        out = tmp_path / "out"
        assert main(["process", str(mask_dir), str(out), "--config", config, "-q"]) == 0
        assert not load_mask(out / "b.png").any()

    def test_flag_beats_config_file(self, mask_dir, tmp_path):
        config = _write_config(tmp_path, "min_component_area=1000\n")
        out = tmp_path / "out"
        assert main(["process", str(mask_dir), str(out), "--config", config,
                     "--min-component-area", "0", "-q"]) == 0
        assert (load_mask(out / "b.png") == load_mask(mask_dir / "b.png")).all()

    def test_config_file_beats_preset(self, mask_dir, tmp_path):
        preset_only, both = tmp_path / "preset", tmp_path / "both"
        main(["process", str(mask_dir), str(preset_only), "--preset", "despeckle", "-q"])
        # despeckle drops the 3x3 block of c.pgm
        assert load_mask(preset_only / "c.pgm").sum() == 20

        config = _write_config(tmp_path, "min_component_area=0\n")
        main(["process", str(mask_dir), str(both), "--preset", "despeckle", "--config", config, "-q"])
        assert load_mask(both / "c.pgm").sum() == 29

    def test_boolean_config_values(self, mask_dir, tmp_path):
        config = _write_config(tmp_path, "iterate_to_fixed_point=yes\nconnectivity=four\n")
        assert main(["process", str(mask_dir), str(tmp_path / "out"), "--config", config, "-q"]) == 0

    def test_unknown_config_key(self, mask_dir, tmp_path):
        config = _write_config(tmp_path, "min_area=3\n")
        with pytest.raises(SystemExit) as excinfo:
            main(["process", str(mask_dir), str(tmp_path / "out"), "--config", config])
        assert excinfo.value.code == 2

    def test_bad_config_value(self, mask_dir, tmp_path):
        config = _write_config(tmp_path, "iterate_to_fixed_point=maybe\n")
        with pytest.raises(SystemExit) as excinfo:
            main(["process", str(mask_dir), str(tmp_path / "out"), "--config", config])
        assert excinfo.value.code == 2

    @pytest.mark.parametrize("argv", [
        ["--jobs", "0"],
        ["--trials", "0"],
        ["--size-range", "7,3"],
        ["--pixel-dropout-prob", "1.5"],
    ])
    def test_invalid_values_are_usage_errors(self, tmp_path, argv):
        assert main(["synth", str(tmp_path / "out"), "-q"] + argv) == 2

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2


class TestReportCommand:
    def test_published_tables(self, capsys):
        assert main(["report", "--published", "-q"]) == 0
        assert "PUBLISHED DICE" in capsys.readouterr().out

    def test_rows_from_records(self, mask_dir, tmp_path, capsys):
        records = tmp_path / "records.csv"
        main(["evaluate", str(mask_dir), "--gt-dir", str(mask_dir), "--report", str(tmp_path / "r.csv"),
              "--records", str(records), "-q"])
        out = tmp_path / "combined.csv"
        assert main(["report", "--row", "UNet", "A", str(records), "--row", "UNet", "B", str(records),
                     "--out", str(out), "-q"]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert [line.split(",")[:2] for line in lines[1:]] == [["UNet", "A"], ["UNet", "B"]]

    def test_missing_records_file(self, tmp_path):
        code = main(["report", "--row", "UNet", "A", str(tmp_path / "missing.csv"), "-q"])
        assert code == 3

    def test_nothing_to_report(self):
        assert main(["report", "-q"]) == 3
