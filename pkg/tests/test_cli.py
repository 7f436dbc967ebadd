import json
import random

import pytest

from oracles import DIMS, VERBS, WORDS, write_task_file
from kgmatch.cli import main
from kgmatch.manifest import read_manifest, sha256_file


def write_pairs_tsv(path, n=120, seed=3):
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(n):
            event = f"PersonX {rng.choice(VERBS)} the {rng.choice(WORDS)}"
            inference = f"to {rng.choice(VERBS)} the {rng.choice(WORDS)}"
            fh.write(f"{event}\t{rng.choice(DIMS)}\t{inference}\n")
    return path


def make_task_records(n=12, seed=11):
    rng = random.Random(seed)
    records = []
    for i in range(n):
        records.append({
            "instance_id": f"q{i}",
            "question": f"What does PersonX do with the {rng.choice(WORDS)}?",
            "candidates": [f"{rng.choice(VERBS)} the {rng.choice(WORDS)}"
                           for _ in range(3)],
            "gold_index": rng.randrange(3),
        })
    return records


@pytest.fixture
def pipeline_inputs(tmp_path):
    pairs = write_pairs_tsv(tmp_path / "pairs.tsv")
    task = write_task_file(tmp_path / "task.jsonl", make_task_records())
    return pairs, task


class TestUsageErrors:
    def test_no_command(self):
        assert main([]) == 1

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_extract_missing_kg(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        assert main(["extract", "--task", str(task), "--pairs", str(pairs),
                     "--conditioning", "qc", "--shape", "pair", "--filter", "hq",
                     "--out-dir", str(tmp_path / "out")]) == 1

    def test_extract_atomic_without_pairs(self, pipeline_inputs, tmp_path):
        _, task = pipeline_inputs
        assert main(["extract", "--kg", "atomic", "--task", str(task),
                     "--conditioning", "qc", "--shape", "pair", "--filter", "hq",
                     "--out-dir", str(tmp_path / "out")]) == 1

    def test_bad_choice(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        assert main(["extract", "--kg", "atomic", "--task", str(task),
                     "--pairs", str(pairs), "--conditioning", "sideways",
                     "--shape", "pair", "--filter", "hq",
                     "--out-dir", str(tmp_path / "out")]) == 1

    def test_analyze_with_nothing(self, tmp_path):
        assert main(["analyze", "--out-dir", str(tmp_path / "out")]) == 1


class TestDataErrors:
    def test_missing_task_file(self, pipeline_inputs, tmp_path):
        pairs, _ = pipeline_inputs
        assert main(["extract", "--kg", "atomic", "--task", str(tmp_path / "no.jsonl"),
                     "--pairs", str(pairs), "--conditioning", "qc",
                     "--shape", "pair", "--filter", "hq",
                     "--out-dir", str(tmp_path / "out")]) == 2

    def test_malformed_pairs(self, pipeline_inputs, tmp_path):
        _, task = pipeline_inputs
        bad = tmp_path / "bad.tsv"
        bad.write_text("just one column\nanother\n", "utf-8")
        assert main(["extract", "--kg", "atomic", "--task", str(task),
                     "--pairs", str(bad), "--conditioning", "qc",
                     "--shape", "pair", "--filter", "hq",
                     "--out-dir", str(tmp_path / "out")]) == 2

    def test_load_check_bad_edges(self, tmp_path):
        bad = tmp_path / "edges.tsv"
        bad.write_text("\n", "utf-8")
        assert main(["load-check", "--kg", "edge", "--input", str(bad)]) == 2


class TestPipeline:
    def run_extract(self, pairs, task, out_dir, seed=0, jobs=1):
        code = main(["extract", "--kg", "atomic", "--task", str(task),
                     "--pairs", str(pairs), "--conditioning", "qc",
                     "--shape", "pair", "--filter", "hq",
                     "--seed", str(seed), "--jobs", str(jobs),
                     "--out-dir", str(out_dir)])
        assert code == 0
        return out_dir / "extraction.jsonl"

    def test_extract_writes_manifest(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        out = tmp_path / "ex"
        results = self.run_extract(pairs, task, out)
        manifest = read_manifest(out)
        assert manifest["stage"] == "extract"
        assert manifest["outputs"]["extraction.jsonl"] == sha256_file(results)

    def test_manifest_clobber_refused(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        out = tmp_path / "ex"
        self.run_extract(pairs, task, out)
        code = main(["split", "--results", str(out / "extraction.jsonl"),
                     "--out-dir", str(out)])
        assert code == 2  # split refuses to overwrite the extract manifest

    def test_full_pipeline(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        results = self.run_extract(pairs, task, tmp_path / "ex")

        split_dir = tmp_path / "split"
        assert main(["split", "--results", str(results),
                     "--out-dir", str(split_dir)]) == 0
        coverage = json.loads((split_dir / "coverage.json").read_text("utf-8"))
        assert "CS" in coverage
        subsets = json.loads((split_dir / "subsets.json").read_text("utf-8"))
        assert sum(len(v) for v in subsets.values()) == 12

        # pick the richest populated subset for emission
        tag = max((t for t in subsets if t != "CS-0"), key=lambda t: len(subsets[t]))
        ks_dir = tmp_path / "ks"
        assert main(["emit-ks", "--train-task", str(task),
                     "--train-results", str(results), "--subset", tag,
                     "--out-dir", str(ks_dir)]) == 0
        base_dir = tmp_path / "base"
        assert main(["emit-ks", "--train-task", str(task),
                     "--train-results", str(results), "--subset", tag,
                     "--baseline", "--out-dir", str(base_dir)]) == 0
        ks_ids = [json.loads(l)["instance_id"]
                  for l in (ks_dir / "ks.eval.jsonl").read_text("utf-8").splitlines()]
        base_ids = [json.loads(l)["instance_id"]
                    for l in (base_dir / "baseline.eval.jsonl").read_text("utf-8").splitlines()]
        assert ks_ids == base_ids and ks_ids

        # synthesize prediction logs over the emitted eval ids and analyze
        gold = {r["instance_id"]: r["gold_index"] for r in make_task_records()}
        base_log = tmp_path / "base_log.jsonl"
        ks_log = tmp_path / "ks_log.jsonl"
        rng = random.Random(0)
        with base_log.open("w", encoding="utf-8") as bfh, \
                ks_log.open("w", encoding="utf-8") as kfh:
            for iid in ks_ids:
                for fh, bias in ((bfh, 1), (kfh, gold[iid])):
                    probs = [0.2, 0.2, 0.2]
                    probs[bias] = 0.6
                    fh.write(json.dumps({
                        "instance_id": iid, "model_tag": "t",
                        "probabilities": probs, "predicted_index": bias,
                    }) + "\n")
        an_dir = tmp_path / "analysis"
        assert main(["analyze", "--base-log", str(base_log), "--ks-log", str(ks_log),
                     "--task", str(task), "--results", str(results),
                     "--out-dir", str(an_dir)]) == 0
        summary = json.loads((an_dir / "analysis.json").read_text("utf-8"))
        assert summary["ks_accuracy"] == 1.0
        assert set(summary["delta_means"]) == {
            "became_correct", "became_incorrect",
            "unchanged_correct", "unchanged_incorrect"}
        assert (an_dir / "deltas.jsonl").exists()
        assert (an_dir / "delta_table.txt").exists()

    def test_rerun_byte_identical(self, pipeline_inputs, tmp_path):
        pairs, task = pipeline_inputs
        a = self.run_extract(pairs, task, tmp_path / "a", seed=9, jobs=1)
        b = self.run_extract(pairs, task, tmp_path / "b", seed=9, jobs=4)
        assert sha256_file(a) == sha256_file(b)

    def test_seed_changes_nothing_for_pair_shape(self, pipeline_inputs, tmp_path):
        # pair shape on the atomic backend is rank-based, so the seed only
        # flows into the manifest
        pairs, task = pipeline_inputs
        a = self.run_extract(pairs, task, tmp_path / "a", seed=1)
        b = self.run_extract(pairs, task, tmp_path / "b", seed=2)
        assert sha256_file(a) == sha256_file(b)

    def test_analyze_curve_only(self, tmp_path):
        curve = tmp_path / "curve.json"
        curve.write_text(json.dumps([[0.01, 0.5], [0.1, 0.7], [1.0, 0.9]]), "utf-8")
        out = tmp_path / "an"
        assert main(["analyze", "--curve", str(curve), "--out-dir", str(out)]) == 0
        summary = json.loads((out / "analysis.json").read_text("utf-8"))
        assert summary["curve"]["max"] == 0.9
        w = [1.0, 0.5, 1 / 3]
        ws = (0.5 * w[0] + 0.7 * w[1] + 0.9 * w[2]) / sum(w)
        assert summary["curve"]["WS"] == pytest.approx(ws)


class TestConvertAndCheck:
    def test_convert_then_load_check(self, tmp_path, capsys):
        csv_path = tmp_path / "atomic.csv"
        csv_path.write_text(
            "event,xWant,xNeed,prefix,split\n"
            'PersonX goes home,"[""to rest"", ""none""]","[""to leave work""]",p,trn\n',
            "utf-8",
        )
        out = tmp_path / "conv"
        assert main(["convert-atomic", "--input", str(csv_path),
                     "--out-dir", str(out)]) == 0
        assert main(["load-check", "--kg", "atomic",
                     "--input", str(out / "pairs.tsv")]) == 0
        captured = capsys.readouterr().out
        assert "3 pairs" in captured  # "none" rows are kept at load time

    def test_build_wikihow(self, tmp_path):
        parses = tmp_path / "parses.tsv"
        parses.write_text(
            "# instance = p1\n"
            "# source = goal\n"
            "1\tBoil\tboil\tVERB\t_\t_\t0\troot\t_\t_\n"
            "2\twater\twater\tNOUN\t_\t_\t1\tobj\t_\t_\n"
            "\n"
            "# source = title\n"
            "1\tBoiling\tboil\tVERB\t_\t_\t0\troot\t_\t_\n"
            "2\twater\twater\tNOUN\t_\t_\t1\tobj\t_\t_\n",
            "utf-8",
        )
        out = tmp_path / "wh"
        assert main(["build-wikihow", "--parses", str(parses),
                     "--instance", "p1", "--out-dir", str(out)]) == 0
        graph = (out / "graph.tsv").read_text("utf-8")
        assert graph == "boil\tobj\twater\t2.0\n"

    def test_gen_probes(self, tmp_path):
        pairs = tmp_path / "dev.tsv"
        pairs.write_text(
            "PersonX puts out a fire\txWant\tto receive recognition\n"
            "PersonX opens the door\txNeed\tto find the key\n"
            "PersonX discovers the answer\txReact\taccomplished\n",
            "utf-8",
        )
        out = tmp_path / "probes"
        assert main(["gen-probes", "--dev-pairs", str(pairs),
                     "--out-dir", str(out)]) == 0
        sizes = json.loads((out / "sizes.json").read_text("utf-8"))
        assert sizes["dev"]["xWant vs xNeed [QA]"] == 2
        manifest = read_manifest(out)
        for name, digest in manifest["outputs"].items():
            assert sha256_file(out / name) == digest
