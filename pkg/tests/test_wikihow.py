import pytest

from kgmatch.wikihow import (
    ParsedSentence,
    ParseFormatError,
    ParseToken,
    WikiHowArticle,
    build_instance_graph,
    build_title_index,
    read_parse_exchange,
    retrieve_titles,
)


def tok(i, surface, lemma, pos, head, deprel):
    return ParseToken(index=i, surface=surface, lemma=lemma, pos=pos, head=head, deprel=deprel)


@pytest.fixture
def articles():
    return [
        WikiHowArticle("a1", "How to Boil Water", "Fill the pot. Boil the water."),
        WikiHowArticle("a2", "How to Paint a Fence", "Buy paint."),
        WikiHowArticle("a3", "How to Train a Dog", "Use treats."),
    ]


class TestRetrieveTitles:
    def test_self_retrieval(self, articles):
        index = build_title_index(articles)
        ranked = retrieve_titles(index, "How to Boil Water", k=3)
        assert ranked[0][0].article_id == "a1"

    def test_no_overlap(self, articles):
        index = build_title_index(articles)
        assert retrieve_titles(index, "zzz qqq", k=3) == []

    def test_ranking_matches_oracle(self):
        from oracles import oracle_tfidf_ranking
        import random
        rng = random.Random(1)
        words = "boil water paint fence dog cat pot fill train treat wash car".split()
        titles = [
            ("t%d" % i, "How to " + " ".join(rng.sample(words, 3)))
            for i in range(100)
        ]
        arts = [WikiHowArticle(tid, title, "") for tid, title in titles]
        index = build_title_index(arts)
        got = retrieve_titles(index, "boil water in a pot", k=10)
        want = oracle_tfidf_ranking(list(enumerate(t for _, t in titles)), "boil water in a pot", 10)
        assert [a.article_id for a, _ in got] == [f"t{i}" for i, _ in want]


class TestParseExchange:
    CONTENT = (
        "# instance = p1\n"
        "# source = goal\n"
        "1\tBoil\tboil\tVERB\t_\t_\t0\troot\t_\t_\n"
        "2\twater\twater\tNOUN\t_\t_\t1\tobj\t_\t_\n"
        "\n"
        "# source = title\n"
        "1\tBoiling\tboil\tVERB\t_\t_\t0\troot\t_\t_\n"
        "2\tpot\tpot\tNOUN\t_\t_\t1\tobj\t_\t_\n"
    )

    def test_groups(self, tmp_path):
        path = tmp_path / "parses.tsv"
        path.write_text(self.CONTENT, "utf-8")
        groups = read_parse_exchange(path)
        assert set(groups) == {("p1", "goal"), ("p1", "title")}
        assert len(groups[("p1", "goal")]) == 1
        assert groups[("p1", "goal")][0].tokens[1].lemma == "water"

    def test_two_roots_rejected(self):
        with pytest.raises(ParseFormatError):
            ParsedSentence((
                tok(1, "a", "a", "NOUN", 0, "root"),
                tok(2, "b", "b", "NOUN", 0, "root"),
            ))

    def test_head_out_of_range(self):
        with pytest.raises(ParseFormatError):
            ParsedSentence((tok(1, "a", "a", "NOUN", 5, "obj"),))


def sentence(specs):
    return ParsedSentence(tuple(
        tok(i + 1, s, l, p, h, d) for i, (s, l, p, h, d) in enumerate(specs)
    ))


class TestBuildInstanceGraph:
    def test_shared_lemma_node(self):
        goal = [sentence([("Boil", "boil", "VERB", 0, "root"),
                          ("water", "water", "NOUN", 1, "obj")])]
        title = [sentence([("Boiling", "boil", "VERB", 0, "root"),
                           ("eggs", "egg", "NOUN", 1, "obj")])]
        graph = build_instance_graph([goal, title])
        assert {n.lemma for n in graph.nodes} == {"boil"}

    def test_zero_overlap(self):
        goal = [sentence([("Paint", "paint", "VERB", 0, "root")])]
        title = [sentence([("Wash", "wash", "VERB", 0, "root")])]
        graph = build_instance_graph([goal, title])
        assert graph.nodes == []
        assert graph.edges == []

    def test_empty_parses(self):
        assert build_instance_graph([]).nodes == []

    def test_three_parse_fixture_matches_hand_oracle(self):
        # hand-built: boil and water overlap everywhere; pot in title+para
        goal = [sentence([("Boil", "boil", "VERB", 0, "root"),
                          ("water", "water", "NOUN", 1, "obj")])]
        title = [sentence([("Boil", "boil", "VERB", 0, "root"),
                           ("water", "water", "NOUN", 1, "obj"),
                           ("pot", "pot", "NOUN", 1, "obl")])]
        para = [sentence([("Fill", "fill", "VERB", 0, "root"),
                          ("pot", "pot", "NOUN", 1, "obj"),
                          ("water", "water", "NOUN", 1, "obl")])]
        graph = build_instance_graph([goal, title, para])
        assert {n.lemma for n in graph.nodes} == {"boil", "water", "pot"}
        got = {(graph.lemma(e.head), e.relation, graph.lemma(e.tail)): e.weight
               for e in graph.edges}
        # hand tally of arcs between concept lemmas:
        # boil->water obj (goal, title) = 2; boil->pot obl (title) = 1;
        # fill is not a node, so para contributes no edges
        assert got == {("boil", "obj", "water"): 2.0, ("boil", "obl", "pot"): 1.0}

    def test_node_lemmas_in_two_parses(self):
        goal = [sentence([("Boil", "boil", "VERB", 0, "root"),
                          ("water", "water", "NOUN", 1, "obj")])]
        title = [sentence([("Boil", "boil", "VERB", 0, "root"),
                           ("kettle", "kettle", "NOUN", 1, "obj")])]
        graph = build_instance_graph([goal, title])
        occurrences = {"boil": 2, "water": 1, "kettle": 1}
        for node in graph.nodes:
            assert occurrences[node.lemma] >= 2

    def test_deterministic(self):
        goal = [sentence([("Boil", "boil", "VERB", 0, "root"),
                          ("water", "water", "NOUN", 1, "obj")])]
        title = [sentence([("Boil", "boil", "VERB", 0, "root"),
                           ("water", "water", "NOUN", 1, "obj")])]
        a = build_instance_graph([goal, title])
        b = build_instance_graph([goal, title])
        assert [(n.node_id, n.lemma) for n in a.nodes] == [(n.node_id, n.lemma) for n in b.nodes]
        assert a.edges == b.edges


def test_article_requires_title():
    with pytest.raises(ValueError):
        WikiHowArticle("x", "  ", "body")
