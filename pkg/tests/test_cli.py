"""CLI surface: subcommands, exit codes, config merging, and file outputs."""

import csv
import json

import numpy as np
import pytest

from coldscript import classify, cli, image_io, synthetic

from coldscript.config import PipelineConfig


def _write_manifest(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label"])
        writer.writerows(rows)
    return path


@pytest.fixture()
def two_line_manifest(tmp_path):
    for i, style in enumerate(("bars", "vees")):
        img = synthetic.make_line_image(style, seed=30 + i)
        image_io.write_png(img, tmp_path / f"{style}.png")
    return _write_manifest(
        tmp_path / "manifest.csv", [("bars.png", "bars"), ("vees.png", "vees")]
    )


class TestExtract:
    def test_writes_feature_csv(self, two_line_manifest, tmp_path, capsys):
        out = tmp_path / "features.csv"
        assert cli.main(["extract", str(two_line_manifest), "-o", str(out)]) == 0
        with open(out, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["label"] + [f"v{i + 1}" for i in range(64)]
        assert [r[0] for r in rows[1:]] == ["bars", "vees"]
        for row in rows[1:]:
            vec = np.array([float(v) for v in row[1:]])
            assert vec.shape == (64,)
            assert (vec >= 0.0).all() and (vec <= 1.0).all()
        assert "rows 2" in capsys.readouterr().out

    def test_missing_image_is_partial_failure(self, two_line_manifest, tmp_path):
        _write_manifest(
            two_line_manifest,
            [("bars.png", "bars"), ("gone.png", "vees"), ("vees.png", "vees")],
        )
        out = tmp_path / "features.csv"
        assert cli.main(["extract", str(two_line_manifest), "-o", str(out)]) == 1
        with open(out, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert [r[0] for r in rows[1:]] == ["bars", "vees"]

    def test_bad_manifest_header_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("file,tag\na.png,x\n", encoding="utf-8")
        assert cli.main(["extract", str(bad), "-o", str(tmp_path / "f.csv")]) == 2

    def test_missing_manifest_is_usage_error(self, tmp_path):
        missing = tmp_path / "nope.csv"
        assert cli.main(["extract", str(missing), "-o", str(tmp_path / "f.csv")]) == 2

    def test_debug_dir_dumps_stages(self, two_line_manifest, tmp_path):
        out = tmp_path / "features.csv"
        debug = tmp_path / "debug"
        assert cli.main([
            "extract", str(two_line_manifest), "-o", str(out),
            "--debug-dir", str(debug),
        ]) == 0
        edges = image_io.read_image(debug / "bars_edges.pgm")
        assert set(np.unique(edges)) <= {0, 255}
        points = (debug / "bars_points.txt").read_text(encoding="utf-8")
        for line in points.strip().splitlines():
            x, y = line.split(",")
            float(x), float(y)

    def test_bins_flag_changes_width(self, two_line_manifest, tmp_path):
        out = tmp_path / "features.csv"
        assert cli.main([
            "extract", str(two_line_manifest), "-o", str(out), "--bins", "8",
        ]) == 0
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header == "label," + ",".join(f"v{i + 1}" for i in range(8))

    def test_config_file_with_flag_override(self, two_line_manifest, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bins": 16, "rdp_epsilon": 3.0}), encoding="utf-8")
        out = tmp_path / "features.csv"
        assert cli.main([
            "extract", str(two_line_manifest), "-o", str(out),
            "--config", str(cfg), "--bins", "8",
        ]) == 0
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header.count(",") == 8  # flag beats the config file

    def test_invalid_config_is_usage_error(self, two_line_manifest, tmp_path):
        assert cli.main([
            "extract", str(two_line_manifest),
            "-o", str(tmp_path / "f.csv"), "--bins", "0",
        ]) == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert cli.main([
            "extract", str(two_line_manifest),
            "-o", str(tmp_path / "f.csv"), "--config", str(bad),
        ]) == 2


class TestPreprocess:
    def test_crops_and_report(self, tmp_path, capsys):
        sample = synthetic.make_page(["bars", "vees"], seed=40, ruled=True)
        image_io.write_png(sample.image, tmp_path / "page.png")
        manifest = _write_manifest(tmp_path / "pages.csv", [("page.png", "mixed")])
        out = tmp_path / "out"
        assert cli.main(["preprocess", str(manifest), "-o", str(out)]) == 0
        report = json.loads((out / "preprocess_report.json").read_text("utf-8"))
        assert report["config"]["bins"] == 64
        (page,) = report["pages"]
        assert page["stats"]["lines"] == 2
        assert page["crops"] == ["page_line0.png", "page_line1.png"]
        for name in page["crops"]:
            assert (out / name).exists()
        assert "pages 1  lines 2  failures 0" in capsys.readouterr().out

    def test_missing_page_is_partial_failure(self, tmp_path):
        manifest = _write_manifest(tmp_path / "pages.csv", [("gone.png", "x")])
        out = tmp_path / "out"
        assert cli.main(["preprocess", str(manifest), "-o", str(out)]) == 1
        report = json.loads((out / "preprocess_report.json").read_text("utf-8"))
        assert "error" in report["pages"][0]


class TestPlot:
    def test_single_image(self, tmp_path, capsys):
        img = synthetic.make_line_image("zigzag", seed=50)
        src = tmp_path / "line.png"
        image_io.write_png(img, src)
        out = tmp_path / "plot.png"
        assert cli.main(["plot", str(src), "-o", str(out)]) == 0
        plot = image_io.read_image(out)
        assert plot.ndim == 3
        assert (plot == 0).any()  # marks
        assert str(out) in capsys.readouterr().out

    def test_manifest_plots_per_class(self, two_line_manifest, tmp_path):
        out = tmp_path / "plots"
        assert cli.main(["plot", str(two_line_manifest), "-o", str(out)]) == 0
        assert (out / "bars.png").exists()
        assert (out / "vees.png").exists()


class TestTrainPredict:
    def test_train_reports_and_saves(self, small_features, tmp_path, capsys):
        out = tmp_path / "model.json"
        assert cli.main([
            "train", str(small_features), "-o", str(out), "--folds", "3",
        ]) == 0
        stdout = capsys.readouterr().out
        assert "3-fold cross-validation, row percents:" in stdout
        assert "CR (%)" in stdout
        assert f"model -> {out}" in stdout
        model = classify.load_model(out)
        assert model.classes == ["bars", "slants", "vees"]
        assert model.feature_config["bins"] == 64

    def test_train_refuses_wrong_width(self, small_features, tmp_path):
        assert cli.main([
            "train", str(small_features),
            "-o", str(tmp_path / "m.json"), "--bins", "8",
        ]) == 2

    def test_predict_labels_images(self, small_model, tmp_path, capsys):
        paths = []
        for style in ("bars", "vees"):
            img = synthetic.make_line_image(style, seed=60)
            p = tmp_path / f"{style}.png"
            image_io.write_png(img, p)
            paths.append(str(p))
        assert cli.main(["predict", str(small_model)] + paths) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        for line, path in zip(lines, paths):
            cells = line.split(",")
            assert cells[0] == path
            assert cells[1] in ("bars", "slants", "vees")
            scores = [float(s) for s in cells[2:]]
            assert len(scores) == 3
        assert lines[0].split(",")[1] == "bars"
        assert lines[1].split(",")[1] == "vees"

    def test_predict_refuses_feature_mismatch(self, small_model, tmp_path):
        img = synthetic.make_line_image("bars", seed=61)
        p = tmp_path / "line.png"
        image_io.write_png(img, p)
        assert cli.main([
            "predict", str(small_model), str(p), "--rdp-epsilon", "3.5",
        ]) == 2

    def test_predict_missing_image_is_partial(self, small_model, tmp_path):
        assert cli.main([
            "predict", str(small_model), str(tmp_path / "gone.png"),
        ]) == 1

    def test_predict_rejects_bad_model(self, tmp_path):
        bad = tmp_path / "model.json"
        bad.write_text("{}", encoding="utf-8")
        assert cli.main(["predict", str(bad), "img.png"]) == 2


class TestEntryPoints:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("coldscript ")

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_log_env_smoke(self, two_line_manifest, tmp_path, monkeypatch):
        monkeypatch.setenv("COLDSCRIPT_LOG", "DEBUG")
        out = tmp_path / "f.csv"
        assert cli.main(["extract", str(two_line_manifest), "-o", str(out)]) == 0

    def test_flags_cover_every_config_field(self):
        import dataclasses

        parser = cli.build_parser()
        helptext = []
        for action in parser._subparsers._group_actions[0].choices.values():
            helptext.append(action.format_help())
        joined = "\n".join(helptext)
        for f in dataclasses.fields(PipelineConfig):
            assert f"--{f.name.replace('_', '-')}" in joined
