"""End-to-end CLI behavior through main(argv)."""

import numpy as np
import pytest

from roofmask.cli import main
from roofmask.evaluation import instances_from_mask
from roofmask.geometry import Box, Detection, MaskPatch
from roofmask.pnm import mask_to_gray, read_pnm, write_pgm, write_ppm
from roofmask.records import detection_to_record, read_manifest, read_records, write_records

from helpers import make_scene


@pytest.fixture
def scene(tmp_path):
    rng = np.random.default_rng(77)
    image, boxes, gt_mask = make_scene(rng, width=520, height=400, max_buildings=4)
    image_path = tmp_path / "scene.ppm"
    write_ppm(image_path, image)
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    write_pgm(gt_dir / "scene.pgm", mask_to_gray(gt_mask))
    return image_path, gt_dir, image, boxes, gt_mask


class TestTileCommand:
    def test_tiles_and_manifest_roundtrip(self, scene, tmp_path, capsys):
        image_path, _, image, _, _ = scene
        out_dir = tmp_path / "tiles"
        assert main(["tile", "--input", str(image_path), "--size", "256", "--out-dir", str(out_dir)]) == 0
        manifest = read_manifest(out_dir / "manifest.txt")
        assert (manifest.grid.rows, manifest.grid.cols) == (2, 3)
        rebuilt = np.zeros_like(image)
        for tile, name in manifest.entries:
            patch = read_pnm(out_dir / name)
            assert patch.shape == (256, 256, 3)
            rebuilt[
                tile.y_offset : tile.y_offset + tile.valid_height,
                tile.x_offset : tile.x_offset + tile.valid_width,
            ] = patch[: tile.valid_height, : tile.valid_width]
        assert (rebuilt == image).all()

    def test_missing_input_fails_cleanly(self, tmp_path, capsys):
        out_dir = tmp_path / "tiles"
        code = main(["tile", "--input", str(tmp_path / "nope.ppm"), "--out-dir", str(out_dir)])
        assert code == 1
        assert "error:" in capsys.readouterr().err
        assert not (out_dir / "manifest.txt").exists()


class TestSplitCommand:
    def test_eighty_twenty_lists(self, scene, tmp_path, capsys):
        image_path, _, _, _, _ = scene
        out_dir = tmp_path / "tiles"
        main(["tile", "--input", str(image_path), "--size", "128", "--out-dir", str(out_dir)])
        # 520x400 at 128 -> 5 cols (ceil 4.06) x 4 rows (ceil 3.125) = 20 tiles
        assert main([
            "split", "--manifest", str(out_dir / "manifest.txt"),
            "--train-fraction", "0.8", "--seed", "3",
        ]) == 0
        train = (out_dir / "train.txt").read_text().splitlines()
        test = (out_dir / "test.txt").read_text().splitlines()
        assert (len(train), len(test)) == (16, 4)
        assert set(train).isdisjoint(test)
        names = {name for _, name in read_manifest(out_dir / "manifest.txt").entries}
        assert set(train) | set(test) == names

    def test_deterministic_under_seed(self, scene, tmp_path):
        image_path, _, _, _, _ = scene
        out_dir = tmp_path / "tiles"
        main(["tile", "--input", str(image_path), "--size", "128", "--out-dir", str(out_dir)])
        args = ["split", "--manifest", str(out_dir / "manifest.txt"), "--seed", "9"]
        main(args)
        first = (out_dir / "train.txt").read_bytes()
        main(args)
        assert (out_dir / "train.txt").read_bytes() == first


class TestDetectCommand:
    def test_single_patch(self, scene, tmp_path, capsys):
        image_path, _, _, _, _ = scene
        out = tmp_path / "det.jsonl"
        assert main(["detect", "--input", str(image_path), "--out", str(out)]) == 0
        records = read_records(out)
        for rec in records:
            assert rec.image == "scene"
            assert rec.label == "building"
            assert 0.0 <= rec.score <= 1.0

    def test_tiled_directory_and_worker_invariance(self, scene, tmp_path):
        image_path, _, _, _, _ = scene
        tiles = tmp_path / "tiles"
        main(["tile", "--input", str(image_path), "--size", "256", "--out-dir", str(tiles)])
        out1 = tmp_path / "a.jsonl"
        out2 = tmp_path / "b.jsonl"
        assert main(["detect", "--input", str(tiles), "--out", str(out1), "--workers", "1"]) == 0
        assert main(["detect", "--input", str(tiles), "--out", str(out2), "--workers", "3"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_config_file_respected(self, scene, tmp_path):
        image_path, _, _, _, _ = scene
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("detection.score_threshold = 1.0\n")
        out = tmp_path / "det.jsonl"
        assert main(["detect", "--input", str(image_path), "--config", str(cfg), "--out", str(out)]) == 0
        assert read_records(out) == []

    def test_bad_config_key_fails(self, scene, tmp_path, capsys):
        image_path, _, _, _, _ = scene
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("detection.scorethreshold = 1.0\n")
        out = tmp_path / "det.jsonl"
        assert main(["detect", "--input", str(image_path), "--config", str(cfg), "--out", str(out)]) == 1
        assert "unknown config keys" in capsys.readouterr().err
        assert not out.exists()


class TestEvalCommand:
    def test_perfect_predictions_score_one(self, scene, tmp_path, capsys):
        _, gt_dir, _, _, gt_mask = scene
        dets = [
            Detection(inst.box, 1.0, mask=MaskPatch(0, 0, inst.mask))
            for inst in instances_from_mask(gt_mask)
        ]
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [detection_to_record(d, "scene") for d in dets])
        report_path = tmp_path / "report.txt"
        assert main([
            "eval", "--pred", str(pred), "--gt", str(gt_dir),
            "--iou", "0.5", "--kind", "mask", "--out", str(report_path),
        ]) == 0
        out = capsys.readouterr().out
        assert "precision\t1.000000" in out
        assert "recall\t1.000000" in out
        assert "f1\t1.000000" in out
        assert report_path.read_text() == out

    def test_box_kind(self, scene, tmp_path, capsys):
        _, gt_dir, _, _, gt_mask = scene
        dets = [Detection(inst.box, 0.9) for inst in instances_from_mask(gt_mask)]
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [detection_to_record(d, "scene") for d in dets])
        assert main(["eval", "--pred", str(pred), "--gt", str(gt_dir), "--kind", "box"]) == 0
        assert "f1\t1.000000" in capsys.readouterr().out

    def test_figure_rendered(self, scene, tmp_path):
        _, gt_dir, _, _, gt_mask = scene
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [])
        figure = tmp_path / "report.png"
        assert main([
            "eval", "--pred", str(pred), "--gt", str(gt_dir), "--figure", str(figure),
        ]) == 0
        assert figure.stat().st_size > 0
        assert figure.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_missing_gt_for_prediction(self, scene, tmp_path, capsys):
        _, gt_dir, _, _, _ = scene
        pred = tmp_path / "pred.jsonl"
        stray = Detection(Box(0, 0, 5, 5), 0.5, mask=MaskPatch(0, 0, np.ones((5, 5), bool)))
        write_records(pred, [detection_to_record(stray, "zzz")])
        assert main(["eval", "--pred", str(pred), "--gt", str(gt_dir)]) == 1
        assert "no ground truth" in capsys.readouterr().err

    def test_counts_missed_images_as_fn(self, scene, tmp_path, capsys):
        # an empty predictions file still counts every gt instance as missed
        _, gt_dir, _, boxes, _ = scene
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [])
        assert main(["eval", "--pred", str(pred), "--gt", str(gt_dir)]) == 0
        out = capsys.readouterr().out
        assert f"fn\t{len(boxes)}" in out
        assert "recall\t0.000000" in out


class TestOverlayCommand:
    def test_no_detections_identity(self, scene, tmp_path):
        image_path, _, image, _, _ = scene
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [])
        out = tmp_path / "ov.ppm"
        assert main(["overlay", "--image", str(image_path), "--pred", str(pred), "--out", str(out)]) == 0
        assert (read_pnm(out) == image).all()

    def test_detections_painted(self, scene, tmp_path):
        image_path, _, image, _, gt_mask = scene
        dets = [
            Detection(inst.box, 1.0, mask=MaskPatch(0, 0, inst.mask))
            for inst in instances_from_mask(gt_mask)
        ]
        pred = tmp_path / "pred.jsonl"
        write_records(pred, [detection_to_record(d, "scene") for d in dets])
        out = tmp_path / "ov.ppm"
        assert main(["overlay", "--image", str(image_path), "--pred", str(pred), "--out", str(out)]) == 0
        painted = read_pnm(out)
        assert painted.shape == image.shape
        assert (painted != image).any()


class TestRleCommand:
    def test_encode_decode_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        mask = rng.uniform(size=(14, 9)) < 0.4
        src = tmp_path / "m.pgm"
        write_pgm(src, mask_to_gray(mask))
        rle_path = tmp_path / "m.rle"
        back_path = tmp_path / "back.pgm"
        assert main(["rle", "encode", "--mask", str(src), "--out", str(rle_path)]) == 0
        assert main(["rle", "decode", "--rle", str(rle_path), "--out", str(back_path)]) == 0
        assert back_path.read_bytes() == src.read_bytes()

    def test_corrupt_rle_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.rle"
        bad.write_text("4 4\n3 3\n")
        out = tmp_path / "out.pgm"
        assert main(["rle", "decode", "--rle", str(bad), "--out", str(out)]) == 1
        assert "error:" in capsys.readouterr().err
        assert not out.exists()
