import pytest

from kgmatch.kg_store import EventInferencePair, PairCorpus
from kgmatch.lexical import load_lexical_resource
from kgmatch.probes import (
    MASK,
    gen_agent_patient,
    gen_concept,
    gen_relational,
    emit_probe_suite,
    load_probes,
    relational_pairings,
    salient_concept,
)


@pytest.fixture(scope="module")
def resource():
    return load_lexical_resource()


def corpus(*pairs):
    return PairCorpus(
        pairs=[EventInferencePair(i, e, d, inf) for i, (e, d, inf) in enumerate(pairs)],
        source_name="fixture",
    )


@pytest.fixture
def fire_corpus():
    return corpus(
        ("PersonX puts out a fire", "xWant", "to receive recognition"),
        ("PersonX puts out a fire", "oWant", "to thank PersonX"),
        ("PersonX discovers the answer", "xReact", "accomplished"),
        ("PersonX opens the door", "xNeed", "to find the key"),
        ("PersonX wins the game", "xWant", "none"),
    )


class TestRelational:
    def test_qa_worked_example(self, fire_corpus):
        probes = gen_relational(fire_corpus, "xWant", "xNeed", "QA")
        probe = next(p for p in probes if p.source == (0,))
        assert probe.prompt == "PersonX puts out a fire. What happens next?"
        assert probe.candidates == ("PersonX wants to receive recognition",
                                    "PersonX needs to receive recognition")
        assert probe.gold_index == 0

    def test_mlm_worked_example(self, fire_corpus):
        probes = gen_relational(fire_corpus, "xWant", "xNeed", "MLM")
        probe = next(p for p in probes if p.source == (0,))
        assert probe.prompt == "PersonX puts out a fire. PersonX [MASK] to receive recognition."
        assert probe.candidates == ("wants", "needs")

    def test_none_inference_skipped(self, fire_corpus):
        probes = gen_relational(fire_corpus, "xWant", "xNeed", "QA")
        assert all(p.source != (4,) for p in probes)

    def test_one_sided_corpus(self, fire_corpus):
        probes = gen_relational(fire_corpus, "xReact", "xAttr", "QA")
        assert len(probes) == 1  # only the xReact pair exists
        assert all(p.gold_index == 0 for p in probes)

    def test_incompatible_scopes(self, fire_corpus):
        with pytest.raises(ValueError):
            gen_relational(fire_corpus, "xWant", "oWant", "QA")
        with pytest.raises(ValueError):
            gen_relational(fire_corpus, "xWant", "xWant", "QA")

    def test_candidates_differ_only_in_verb(self, fire_corpus):
        for probe in gen_relational(fire_corpus, "xWant", "xIntent", "QA"):
            a, b = (c.split() for c in probe.candidates)
            assert len(a) == len(b)
            diffs = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
            assert diffs == [1]  # the relation verb slot

    def test_gold_counts_match_dimension_counts(self, fire_corpus):
        probes = gen_relational(fire_corpus, "xWant", "xNeed", "MLM")
        n_want = sum(1 for p in fire_corpus
                     if p.dimension == "xWant" and p.inference != "none")
        n_need = sum(1 for p in fire_corpus if p.dimension == "xNeed")
        assert sum(1 for p in probes if p.gold_index == 0) == n_want
        assert sum(1 for p in probes if p.gold_index == 1) == n_need


class TestAgentPatient:
    def test_qa_x_variant(self, fire_corpus):
        probes = gen_agent_patient(fire_corpus, "Want", "QA")
        probe = next(p for p in probes if p.source == (0,))
        assert probe.prompt == "PersonX puts out a fire. Who wants to receive recognition?"
        assert probe.candidates == ("PersonX", "others")
        assert probe.gold_index == 0

    def test_mlm_o_variant_plural_stripped(self, fire_corpus):
        probes = gen_agent_patient(fire_corpus, "Want", "MLM")
        probe = next(p for p in probes if p.source == (1,))
        assert probe.prompt == "PersonX puts out a fire. [MASK] want to thank PersonX."
        assert probe.gold_index == 1

    def test_same_verb_form_both_classes(self, fire_corpus):
        probes = gen_agent_patient(fire_corpus, "Want", "MLM")
        verbs = {p.prompt.split(MASK)[1].split()[0] for p in probes}
        assert verbs == {"want"}

    def test_dim_without_o_variant(self, fire_corpus):
        with pytest.raises(ValueError):
            gen_agent_patient(fire_corpus, "Need", "MLM")


class TestSalientConcept:
    def test_verb_with_antonym_preferred(self, resource):
        assert salient_concept("PersonX discovers the answer", resource) == (
            "discovers", "discovery", "lose")

    def test_falls_back_to_noun(self, resource):
        # "puts" has no antonym-bearing lemma; "fire" does
        assert salient_concept("PersonX puts out a fire", resource) == (
            "fire", "fire", "water")

    def test_none_when_nothing_qualifies(self, resource):
        assert salient_concept("PersonX is here", resource) is None


class TestConcept:
    def test_event_mlm_worked_example(self, fire_corpus, resource):
        probes = gen_concept(fire_corpus, "event", "MLM", resource)
        probe = next(p for p in probes if p.source == (2,))
        assert probe.prompt == "PersonX [MASK] the answer. PersonX feels accomplished."
        assert probe.candidates == ("discovery", "lose")
        assert probe.gold_index == 0

    def test_inference_qa_antonym_swap(self, fire_corpus, resource):
        probes = gen_concept(fire_corpus, "inference", "QA", resource)
        probe = next(p for p in probes if p.source == (0,))
        assert probe.prompt == "PersonX puts out a fire. What happens next?"
        assert probe.candidates == ("PersonX wants to receive recognition",
                                    "PersonX wants to give recognition")

    def test_event_qa_prompt_uses_what_happened(self, fire_corpus, resource):
        probes = gen_concept(fire_corpus, "event", "QA", resource)
        probe = next(p for p in probes if p.source == (0,))
        assert probe.prompt == "PersonX wants to receive recognition. What happened?"
        assert probe.candidates == ("PersonX puts out a fire", "PersonX puts out a water")

    def test_pair_without_antonym_skipped(self, resource):
        c = corpus(("PersonX is here", "xAttr", "calm zzz"))
        assert gen_concept(c, "event", "MLM", resource) == []

    def test_mask_absent_from_candidates(self, fire_corpus, resource):
        for target in ("event", "inference"):
            for probe in gen_concept(fire_corpus, target, "MLM", resource):
                assert MASK not in probe.candidates[0]
                assert MASK not in probe.candidates[1]


class TestSuite:
    def test_pairing_count(self):
        assert len(relational_pairings()) == 18  # C(6,2) x-dims + C(3,2) o-dims

    def test_emit_and_reload(self, fire_corpus, resource, tmp_path):
        report = emit_probe_suite({"dev": fire_corpus}, tmp_path, resource)
        assert report["dev"]["xWant vs xNeed [QA]"] == 2
        probes = load_probes(tmp_path / "relational_xWant_vs_xNeed.qa.dev.jsonl")
        assert len(probes) == 2
        assert all(p.format == "QA" for p in probes)

    def test_empty_corpus_all_zero(self, resource, tmp_path):
        empty = PairCorpus(pairs=[], source_name="empty")
        report = emit_probe_suite({"dev": empty}, tmp_path, resource)
        assert all(v == 0 for v in report["dev"].values())

    def test_byte_identical_regeneration(self, fire_corpus, resource, tmp_path):
        from kgmatch.manifest import sha256_file
        emit_probe_suite({"dev": fire_corpus}, tmp_path / "a", resource)
        emit_probe_suite({"dev": fire_corpus}, tmp_path / "b", resource)
        for path in sorted((tmp_path / "a").glob("*.jsonl")):
            assert sha256_file(path) == sha256_file(tmp_path / "b" / path.name)

    def test_probe_invariants(self, fire_corpus, resource, tmp_path):
        emit_probe_suite({"dev": fire_corpus}, tmp_path, resource)
        for path in tmp_path.glob("*.jsonl"):
            for probe in load_probes(path):  # Probe.__post_init__ re-validates
                assert probe.gold_index in (0, 1)
                assert len(probe.candidates) == 2

    def test_balance_downsamples(self):
        pairs = [("event %d" % i, "xWant", "inference %d" % i) for i in range(5)]
        pairs += [("event n", "xNeed", "inference n")]
        c = corpus(*pairs)
        balanced = gen_relational(c, "xWant", "xNeed", "QA", balance=True)
        assert sum(1 for p in balanced if p.gold_index == 0) == 1
        assert sum(1 for p in balanced if p.gold_index == 1) == 1
