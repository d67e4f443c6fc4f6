import json

import pytest

import rallyviz


def test_analyze_fixture(tracking, tactics):
    doc = rallyviz.analyze(tracking, tactics)
    kinds = {e["kind"] for e in doc["events"]["events"]}
    assert {"Stroke", "Bounce", "Turn"} <= kinds
    ids = {f["fact_id"] for f in doc["tactics"]["facts"]}
    assert "r10_end_line_return@stroke#5" in ids
    assert any(i.startswith("import:KeyStroke@") for i in ids)


def test_pyramid_brush(tracking):
    full = rallyviz.pyramid(tracking)
    brushed = rallyviz.pyramid(tracking, span=(100, 120))
    assert len(brushed["nodes"]) < len(full["nodes"])


def test_corpus_and_recommend(corpus):
    stats = rallyviz.corpus_stats(corpus)
    linear = next(o for o in stats["orders"] if o["order"] == "Linear")
    assert linear["ratio"] == pytest.approx(0.525, abs=1e-3)
    rec = rallyviz.recommend(corpus, "ball_trajectory", "Linear")
    assert rec["source"] == "Corpus"
    assert rec["visual"] == "Polyline"


def test_schedule_matches_golden(root, tracking):
    script = json.loads((root / "data/fixtures/scripts/flashforward.json").read_text())
    schedule = rallyviz.compile_schedule(script, tracking)
    golden = json.loads((root / "tests/golden/flashforward/manifest.json").read_text())
    assert len(schedule["frames"]) == golden["total_frames"]


def test_render_is_byte_identical_to_golden(root, tracking, tactics, tmp_path):
    manifest = rallyviz.render(root / "data/fixtures/scripts/zigzag.json", tracking, tmp_path, tactics)
    golden = root / "tests/golden/zigzag"
    assert (tmp_path / "manifest.json").read_bytes() == (golden / "manifest.json").read_bytes()
    for n in (0, manifest["total_frames"] // 2, manifest["total_frames"] - 1):
        name = f"overlays/{n:06d}.svg"
        assert (tmp_path / name).read_bytes() == (golden / name).read_bytes()


def test_errors_carry_codes(root, tracking):
    with pytest.raises(rallyviz.RallyvizError) as info:
        rallyviz.recommend(root / "data/corpus/sample_corpus.json", "no_such_attribute", "Linear")
    assert info.value.code == "NotFound"
    script = json.loads((root / "data/fixtures/scripts/linear.json").read_text())
    script["order"] = "Grouped"
    with pytest.raises(rallyviz.RallyvizError) as info:
        rallyviz.compile_schedule(script, tracking)
    assert info.value.code in ("UnsupportedOrder", "Validation")
    with pytest.raises(rallyviz.RallyvizError) as info:
        rallyviz.analyze(root / "missing.json")
    assert info.value.code == "Io"


def test_run_cli(tracking):
    code, out, err = rallyviz.run_cli("ingest", "validate", tracking)
    assert code == 0, err
    assert out.startswith("ok: 300 frames, 1920x1080 @ 50 fps")
    code, _, err = rallyviz.run_cli("ingest", "validate")
    assert code == 1
