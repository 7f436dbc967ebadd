"""End-to-end acceptance checks for the model harness.

Each test prints one ``[PASS]``/``[FAIL]`` line.  Cross-component
validity is checked with the toolkit's own analyzer, loaded from the
installed package (files are still the only exchange between the two
code bases).
"""

import json
import time
from contextlib import contextmanager

from fixtures_harness import make_ks_records, make_mlm_probes, write_jsonl
from ksharness.config import HarnessConfig
from ksharness.finetune import finetune_mc
from ksharness.mlm import eval_mlm_probe


@contextmanager
def criterion(label):
    try:
        yield
    except Exception:
        print(f"[FAIL] {label}")
        raise
    print(f"[PASS] {label}")


def test_mc_round_trip(tmp_path, tiny_config_kwargs):
    with criterion("100-instance fine-tune emits an analyzer-valid log "
                   "with matching ids in < 10 min"):
        from kgmatch.analyzer import accuracy, delta_analysis, load_prediction_log

        records = make_ks_records(100, seed=0)
        bare = [dict(rec, knowledge=[None] * len(rec["knowledge"]))
                for rec in records]
        train = write_jsonl(tmp_path / "ks.train.jsonl", records)
        evalf = write_jsonl(tmp_path / "ks.eval.jsonl", records)
        base_train = write_jsonl(tmp_path / "base.train.jsonl", bare)
        base_eval = write_jsonl(tmp_path / "base.eval.jsonl", bare)

        started = time.monotonic()
        ks_log_path = finetune_mc(HarnessConfig(
            train_path=str(train), eval_path=str(evalf),
            log_path=str(tmp_path / "ks.log.jsonl"), **tiny_config_kwargs,
        ), model_tag="ks")
        base_log_path = finetune_mc(HarnessConfig(
            train_path=str(base_train), eval_path=str(base_eval),
            log_path=str(tmp_path / "base.log.jsonl"), **tiny_config_kwargs,
        ), model_tag="baseline")
        elapsed = time.monotonic() - started
        assert elapsed < 600, f"took {elapsed:.0f}s"

        # load_prediction_log enforces every probability invariant
        ks_log = load_prediction_log(ks_log_path)
        base_log = load_prediction_log(base_log_path)
        eval_ids = [rec["instance_id"] for rec in records]
        assert [r.instance_id for r in ks_log] == eval_ids
        assert [r.instance_id for r in base_log] == eval_ids

        gold = {rec["instance_id"]: rec["gold_index"] for rec in records}
        assert 0.0 <= accuracy(ks_log, gold) <= 1.0
        deltas, means = delta_analysis(base_log, ks_log, gold)
        assert len(deltas) == 100
        assert all(-1.0 <= d.delta <= 1.0 for d in deltas)


def test_mlm_probe_path(tmp_path, tiny_config_kwargs):
    with criterion("1k-probe zero-shot run and {1%,10%,100%} fine-tune curve "
                   "yield a valid LearningCurve"):
        from kgmatch.analyzer import LearningCurve, curve_metrics

        probes = make_mlm_probes(1000, seed=1)
        path = write_jsonl(tmp_path / "probes.jsonl", probes)

        config = HarnessConfig(eval_path=str(path),
                               log_path=str(tmp_path / "zero.log.jsonl"),
                               **tiny_config_kwargs)
        zero_acc, log = eval_mlm_probe(config, mode="zero-shot")
        assert 0.0 <= zero_acc <= 1.0
        assert len(log) == 1000

        curve_config = HarnessConfig(eval_path=str(path),
                                     log_path=str(tmp_path / "curve.log.jsonl"),
                                     **tiny_config_kwargs)
        points = eval_mlm_probe(curve_config, mode="fine-tune-curve",
                                fractions=(0.01, 0.1, 1.0))
        curve = LearningCurve(tuple(points))
        peak, ws = curve_metrics(curve)
        assert 0.0 <= ws <= peak <= 1.0
        saved = json.loads((tmp_path / "curve.log.curve.json").read_text("utf-8"))
        assert [f for f, _ in saved] == [0.01, 0.1, 1.0]
