# A guided tour of the extraction pipeline: from a knowledge corpus and a
# small multiple-choice task to knowledge-surrounded datasets and the
# coverage/delta reports. Everything runs in-memory on synthetic data and
# finishes in a couple of seconds.
#
# Run: python3 demos/walkthrough_extraction.py

import random

from kgmatch.analyzer import coverage_report, format_coverage_table
from kgmatch.extractor import (
    ExtractionConfig,
    PairStore,
    TaskInstance,
    extract_dataset,
    split_subsets,
)
from kgmatch.kg_store import EventInferencePair, PairCorpus
from kgmatch.ks_emit import EmissionPlan, augment

# --- 1. A toy event-inference corpus ---------------------------------------
# Real runs load a normalized TSV (kgmatch load-check / convert-atomic);
# here we synthesize 150 pairs so the demo is self-contained.

WORDS = "fire water dentist school kid drive home book door game music".split()
VERBS = "puts opens finds makes takes gives keeps wants".split()
DIMS = ("xWant", "xNeed", "xIntent", "xReact", "xEffect")

rng = random.Random(0)
pairs = [
    EventInferencePair(
        i,
        f"PersonX {rng.choice(VERBS)} the {rng.choice(WORDS)}",
        rng.choice(DIMS),
        f"to {rng.choice(VERBS)} the {rng.choice(WORDS)}",
    )
    for i in range(150)
]
corpus = PairCorpus(pairs=pairs, source_name="demo")
print(f"corpus: {len(corpus)} event-inference pairs")

# --- 2. A tiny multiple-choice task -----------------------------------------

instances = [
    TaskInstance(
        f"demo-{i}",
        f"What does PersonX do with the {rng.choice(WORDS)}?",
        tuple(f"{rng.choice(VERBS)} the {rng.choice(WORDS)}" for _ in range(3)),
        rng.randrange(3),
    )
    for i in range(15)
]

# --- 3. Extraction -----------------------------------------------------------
# QC conditioning asks the knowledge to bridge question and answer; the HQ
# filter then guarantees no two candidates share the same knowledge text.

store = PairStore(corpus)
config = ExtractionConfig(conditioning="QC", shape="pair", filter="HQ", pool_size=10)
results = extract_dataset(store, "atomic", instances, config, seed=0)

example = results[0]
print(f"\nfirst instance ({example.instance_id}, subset {example.subset_tag}):")
for j, item in enumerate(example.per_candidate):
    text = item.rendered if item else "(no knowledge)"
    print(f"  candidate {j}: {text}")

# --- 4. CS subsets and coverage ----------------------------------------------
# CS-X collects instances where exactly X candidates got knowledge; the
# coverage table says how much of the dataset the graph can speak to.

subsets = split_subsets(results)
report = coverage_report(
    {t: ids for t, ids in subsets.items() if t != "CS-0"}, len(results)
)
print("\n" + format_coverage_table({"QC/pair/HQ": report}))

# --- 5. Knowledge-surrounded records ------------------------------------------
# The emitted record keeps candidates and knowledge in separate slots; a
# model harness appends knowledge to each candidate at encoding time.

inst, res = instances[0], results[0]
record = augment(inst, res, with_knowledge=True)
plan = EmissionPlan(subset=res.subset_tag, eval_variant="KS+")
print(f"\nemission plan: subset={plan.subset} eval={plan.eval_variant}")
print("knowledge-surrounded record:")
for cand, know in zip(record["candidates"], record["knowledge"]):
    print(f"  {cand!r} + {know!r}")
