import json

import pytest

from gaitpipe import cli
from gaitpipe.pipeline import PipelineConfig


def run(argv):
    return cli.main([str(a) for a in argv])


class TestWorkflow:
    def test_synth_process_evaluate_aggregate(self, tmp_path, capsys):
        recording = tmp_path / "rec.csv"
        truth = tmp_path / "truth.csv"
        truth_segs = tmp_path / "truth_segs.json"
        assert run(["synth", "--seed", "3",
                    "--out-recording", recording,
                    "--out-events", truth,
                    "--out-segments", truth_segs]) == 0
        assert recording.exists() and truth.exists() and truth_segs.exists()

        events = tmp_path / "events.json"
        segments = tmp_path / "segments.json"
        assert run(["process", recording,
                    "--out-events", events,
                    "--out-segments", segments]) == 0
        doc = json.loads(events.read_text())
        assert doc and all({"time_s", "kind", "side"} <= set(e) for e in doc)

        metrics = tmp_path / "metrics.json"
        assert run(["evaluate", events, truth, "--participant", "p1",
                    "--out", metrics]) == 0
        mdoc = json.loads(metrics.read_text())
        assert mdoc["participant"] == "p1"
        assert mdoc["IC"]["f1"] >= 0.98
        assert mdoc["FC"]["f1"] >= 0.98
        assert mdoc["IC"]["errors"]["median_abs_s"] <= 0.08

        # second participant for the aggregation stage
        metrics2 = tmp_path / "metrics2.json"
        assert run(["evaluate", events, truth, "--participant", "p2",
                    "--out", metrics2]) == 0
        summary = tmp_path / "summary.json"
        assert run(["aggregate", metrics, metrics2, "--two-stage",
                    "--out", summary]) == 0
        sdoc = json.loads(summary.read_text())
        assert sdoc["two_stage"] is True
        assert sdoc["IC"]["median"] >= 0.98
        assert sdoc["IC"]["ws_iqr"] == 0.0

    def test_process_determinism(self, tmp_path):
        recording = tmp_path / "rec.csv"
        run(["synth", "--seed", "9", "--out-recording", recording,
             "--out-events", tmp_path / "t.csv",
             "--out-segments", tmp_path / "s.json"])
        outs = []
        for tag in ("a", "b"):
            ev = tmp_path / f"events_{tag}.json"
            run(["process", recording, "--out-events", ev,
                 "--out-segments", tmp_path / f"segs_{tag}.json"])
            outs.append(ev.read_text())
        assert outs[0] == outs[1]

    def test_process_with_config_file(self, tmp_path):
        recording = tmp_path / "rec.csv"
        run(["synth", "--seed", "4", "--out-recording", recording,
             "--out-events", tmp_path / "t.csv",
             "--out-segments", tmp_path / "s.json"])
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"match_window_s": 0.4}))
        assert run(["process", recording, "--config", cfg,
                    "--out-events", tmp_path / "e.json",
                    "--out-segments", tmp_path / "g.json"]) == 0

    def test_bad_config_key_exit_1(self, tmp_path, capsys):
        recording = tmp_path / "rec.csv"
        run(["synth", "--seed", "4", "--out-recording", recording,
             "--out-events", tmp_path / "t.csv",
             "--out-segments", tmp_path / "s.json"])
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"not_a_key": 1}))
        assert run(["process", recording, "--config", cfg,
                    "--out-events", tmp_path / "e.json",
                    "--out-segments", tmp_path / "g.json"]) == 1
        assert "not_a_key" in capsys.readouterr().err

    def test_missing_recording_exit_1(self, tmp_path, capsys):
        assert run(["process", tmp_path / "nope.csv"]) == 1
        assert "error" in capsys.readouterr().err


class TestSynthCommand:
    def test_config_file_with_script(self, tmp_path):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({
            "duration_s": 12.0, "seed": 1,
            "script": [{"kind": "rest", "duration_s": 3.0},
                       {"kind": "walk", "duration_s": 9.0}]}))
        segs = tmp_path / "segs.json"
        assert run(["synth", "--config", cfg,
                    "--out-recording", tmp_path / "r.csv",
                    "--out-events", tmp_path / "e.csv",
                    "--out-segments", segs]) == 0
        doc = json.loads(segs.read_text())
        assert [s["kind"] for s in doc] == ["Boundary", "GaitBout"]

    def test_unknown_synth_key_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({"cadence": 120}))
        assert run(["synth", "--config", cfg,
                    "--out-recording", tmp_path / "r.csv",
                    "--out-events", tmp_path / "e.csv",
                    "--out-segments", tmp_path / "s.json"]) == 1
        assert "cadence" in capsys.readouterr().err

    def test_seed_flag_overrides_config(self, tmp_path):
        recs = []
        for seed in (1, 2):
            out = tmp_path / f"r{seed}.csv"
            run(["synth", "--seed", seed, "--out-recording", out,
                 "--out-events", tmp_path / f"e{seed}.csv",
                 "--out-segments", tmp_path / f"s{seed}.json"])
            recs.append(out.read_text())
        assert recs[0] == recs[1]  # seed changes only the noise; none here
        noisy = []
        cfg = tmp_path / "n.json"
        cfg.write_text(json.dumps({"noise_sigma": 0.3}))
        for seed in (1, 2):
            out = tmp_path / f"rn{seed}.csv"
            run(["synth", "--config", cfg, "--seed", seed,
                 "--out-recording", out,
                 "--out-events", tmp_path / f"en{seed}.csv",
                 "--out-segments", tmp_path / f"sn{seed}.json"])
            noisy.append(out.read_text())
        assert noisy[0] != noisy[1]


class TestFactorsCommand:
    def test_fit_and_report(self, tmp_path, capsys):
        from gaitpipe import factors
        obs, _ = factors.simulate_dataset(n_subjects=6, obs_per_subject=4,
                                          seed=0)
        table = tmp_path / "table.csv"
        lines = ["f1,age,sex,disease,subject,environment,aid"]
        dis_names = {0: "HC", 1: "mild", 2: "moderate", 3: "severe"}
        for o in obs:
            lines.append(f"{o.f1},{50 + 10 * o.age_z},{o.sex},"
                         f"{dis_names[o.disease_idx]},{o.subject_idx},"
                         f"{o.environment},{o.aid}")
        table.write_text("\n".join(lines) + "\n")
        out = tmp_path / "posterior.json"
        assert run(["factors", table, "--draws", 100, "--warmup", 100,
                    "--chains", 2, "--seed", 1, "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert doc["n_subjects"] == 6
        assert len(doc["contrasts"]) == 4
        assert doc["max_rhat"] > 0

    def test_malformed_table_exit_1(self, tmp_path, capsys):
        table = tmp_path / "bad.csv"
        table.write_text("wrong,header\n1,2\n")
        assert run(["factors", table, "--out", tmp_path / "o.json"]) == 1
        assert "error" in capsys.readouterr().err


class TestConfigCommand:
    def test_print_defaults(self, capsys):
        assert run(["config", "--print-defaults"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc == PipelineConfig().to_json()

    def test_no_action_exit_2(self, capsys):
        assert run(["config"]) == 2
