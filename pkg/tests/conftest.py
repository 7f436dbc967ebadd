import pytest

from kgmatch.kg_store import load_edge_graph
from oracles import make_pair_corpus


@pytest.fixture(scope="session")
def corpus200():
    return make_pair_corpus(200, seed=7)


@pytest.fixture
def edge_tsv(tmp_path):
    path = tmp_path / "edges.tsv"
    path.write_text(
        "keep\tAntonym\tget_rid\t2.0\n"
        "fire\tRelatedTo\twater\t1.5\n"
        "fire\tAntonym\twater\t1.0\n"
        "school\tAtLocation\tkid\t1.0\n"
        "kid\tRelatedTo\thome\t1.0\n"
        "drive\tUsedFor\tcar\t1.0\n"
        "keep\tAntonym\tget_rid\t1.0\n",
        "utf-8",
    )
    return path


@pytest.fixture
def edge_graph(edge_tsv):
    return load_edge_graph(edge_tsv, "edge-tsv")
