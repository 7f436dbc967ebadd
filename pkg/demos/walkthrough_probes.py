# Probe generation in three flavors — relational, agent-patient and
# concept — plus the learning-curve metrics the analyzer computes over a
# probe fine-tuning run.
#
# Run: python3 demos/walkthrough_probes.py

from kgmatch.analyzer import LearningCurve, curve_metrics
from kgmatch.kg_store import EventInferencePair, PairCorpus
from kgmatch.lexical import load_lexical_resource
from kgmatch.probes import gen_agent_patient, gen_concept, gen_relational

corpus = PairCorpus(pairs=[
    EventInferencePair(0, "PersonX puts out a fire", "xWant", "to receive recognition"),
    EventInferencePair(1, "PersonX puts out a fire", "oWant", "to thank PersonX"),
    EventInferencePair(2, "PersonX discovers the answer", "xReact", "accomplished"),
    EventInferencePair(3, "PersonX opens the door", "xNeed", "to find the key"),
], source_name="demo")

# --- Relational probes ---------------------------------------------------
# Can a model tell "wants" from "needs"? Each probe pairs one inference
# with the verb of a competing dimension; only the relation verb differs.

print("relational (xWant vs xNeed):")
for probe in gen_relational(corpus, "xWant", "xNeed", "QA"):
    print(f"  Q: {probe.prompt}")
    for i, cand in enumerate(probe.candidates):
        marker = "*" if i == probe.gold_index else " "
        print(f"   {marker} {cand}")

for probe in gen_relational(corpus, "xWant", "xNeed", "MLM"):
    print(f"  MLM: {probe.prompt}  -> {probe.candidates}")

# --- Agent-patient probes --------------------------------------------------
# Same inference, but who does it apply to: PersonX or others?

print("\nagent-patient (Want):")
for probe in gen_agent_patient(corpus, "Want", "MLM"):
    gold = probe.candidates[probe.gold_index]
    print(f"  {probe.prompt}  -> {gold}")

# --- Concept probes --------------------------------------------------------
# Swap the salient concept for its antonym; the model must prefer the
# original. The salient concept is the first antonym-bearing verb, else
# the first antonym-bearing noun ("puts" has no antonym, "fire" does).

resource = load_lexical_resource()
print("\nconcept (event target, MLM):")
for probe in gen_concept(corpus, "event", "MLM", resource):
    print(f"  {probe.prompt}  -> {probe.candidates}")

# --- Curve metrics ---------------------------------------------------------
# A harness fine-tunes on growing fractions of probes; the analyzer
# summarizes the curve as (max, WS) where WS weights early points more.

curve = LearningCurve(((0.01, 0.52), (0.10, 0.71), (1.00, 0.88)))
peak, ws = curve_metrics(curve)
print(f"\nlearning curve {list(curve.points)}")
print(f"max = {peak:.2f}, WS = {ws:.3f}  (early accuracy counts most)")
