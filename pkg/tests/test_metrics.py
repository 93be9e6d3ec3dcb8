import json
import random

import numpy as np
import pytest

from cascadekit.cascade import build_activation_dag, extract_cascades, identify_seeds
from cascadekit.events import validate_sequence
from cascadekit.graph import FollowerGraph
from cascadekit.metrics import (
    CORPUS_METRICS,
    cascade_metrics,
    corpus_distributions,
    read_distribution_csv,
    story_metrics,
    write_distribution_csv,
)
from cascadekit.sim import ContagionConfig, GraphConfig, generate_graph, simulate_corpus
from cascadekit._arrays import longest_path_lengths

import oracles
from conftest import random_instance


def seq_of(order, story="s"):
    return validate_sequence(story, [(u, t) for t, u in enumerate(order)])[0]


@pytest.fixture
def fixture_dag(fixture_graph, fixture_seq):
    return build_activation_dag(fixture_graph, fixture_seq)


def test_principal_metrics(fixture_dag):
    yellow, red = extract_cascades(fixture_dag)
    m = cascade_metrics(yellow)
    assert (m.size, m.max_diameter, m.min_diameter, m.spread) == (5, 2, 1, 4)
    r = cascade_metrics(red)
    assert (r.size, r.spread) == (3, 2)


def test_size_one_cascade():
    d = build_activation_dag(FollowerGraph.from_edges([]), seq_of(["x"]))
    m = cascade_metrics(extract_cascades(d)[0])
    assert (m.size, m.max_diameter, m.min_diameter, m.spread) == (1, 0, 0, 0)


def test_fixture_story(fixture_dag):
    s = story_metrics(fixture_dag, extract_cascades(fixture_dag), 1)
    assert s.community_value == 7
    assert s.normalized_community_value == 1.0
    assert s.largest_cascade_size == 5
    assert s.global_spread == 4
    assert s.global_min_diameter == 1
    assert s.global_max_diameter == 2
    assert [len(c.edges) for c in extract_cascades(fixture_dag)] == [5, 2]
    assert s.principal.size == 5
    doc = json.loads(s.to_json())
    assert doc["community_value"] == 7 and len(doc["cascades"]) == 2


def test_all_isolated_story():
    d = build_activation_dag(FollowerGraph.from_edges([(8, 9)]), seq_of([1, 2, 3, 4]))
    s = story_metrics(d)
    assert s.community_value == 0 and s.normalized_community_value == 0
    assert s.global_max_diameter == s.global_min_diameter == 0
    assert s.principal.max_diameter == s.principal.min_diameter == 0


def test_random_instances_match_oracle():
    rng = random.Random(21)
    for _ in range(300):
        edges, order = random_instance(rng)
        d = build_activation_dag(FollowerGraph.from_edges(edges), seq_of(order))
        s = story_metrics(d)
        want = oracles.story_metrics(order, oracles.dag_edges(edges, order))
        got_per = [
            {"size": c.size, "max_diameter": c.max_diameter,
             "min_diameter": c.min_diameter, "spread": c.spread}
            for c in s.cascades
        ]
        assert got_per == want["per"]
        for key in ("largest_cascade_size", "global_max_diameter", "global_min_diameter",
                    "global_spread", "community_value", "normalized_community_value"):
            assert getattr(s, key) == want[key], key
        assert s.principal == s.cascades[0]


def test_longest_path_dp_matches_enumeration():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(1, 12)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35]
        src = np.array([a for a, _ in edges], dtype=np.int64)
        dst = np.array([b for _, b in edges], dtype=np.int64)
        assert int(longest_path_lengths(n, src, dst).max(initial=0)) == oracles.longest_path(edges)


def test_invariants_random():
    rng = random.Random(8)
    for _ in range(300):
        edges, order = random_instance(rng)
        d = build_activation_dag(FollowerGraph.from_edges(edges), seq_of(order))
        s = story_metrics(d)
        for c in s.cascades:
            assert 0 <= c.min_diameter <= c.max_diameter <= c.size - 1
            assert 0 <= c.spread <= c.size - 1
        assert s.global_min_diameter <= s.global_max_diameter
        n, k = s.activated, s.n_seeds
        bound = (n - k) / n
        assert s.normalized_community_value >= bound - 1e-12
        tree_like = all(x <= 1 for x in d.in_degree())
        assert (abs(s.normalized_community_value - bound) < 1e-12) == tree_like


def test_deleting_non_seed_never_increases_community_value():
    rng = random.Random(13)
    for _ in range(200):
        edges, order = random_instance(rng)
        g = FollowerGraph.from_edges(edges)
        d = build_activation_dag(g, seq_of(order))
        seeds = set(identify_seeds(d))
        for u in order:
            if u in seeds:
                continue
            rest = [x for x in order if x != u]
            assert build_activation_dag(g, seq_of(rest)).n_edges <= d.n_edges


def test_corpus_single_fixture(fixture_dag):
    dists = corpus_distributions([story_metrics(fixture_dag)])
    assert set(dists) == set(CORPUS_METRICS)
    assert dists["global_cascade_size"].histogram == {5: 1, 3: 1}
    assert dists["principal_size"].histogram == {5: 1}


def test_corpus_two_identical_stories_double(fixture_dag):
    one = corpus_distributions([story_metrics(fixture_dag)])
    two = corpus_distributions([story_metrics(fixture_dag)] * 2)
    for name in one:
        assert two[name].histogram == {k: 2 * v for k, v in one[name].histogram.items()}


def test_corpus_totals_simulated():
    g = generate_graph(GraphConfig("uniform-random", 3000, 8), 2)
    corpus = simulate_corpus(g, ContagionConfig(p=0.12, seeds_per_story=2, n_stories=500), 4)
    stories = [story_metrics(build_activation_dag(g, s)) for s in corpus.sequences.values()]
    dists = corpus_distributions(stories)
    assert dists["global_cascade_size"].total == sum(len(s.cascades) for s in stories)
    assert sorted(dists["global_cascade_size"].samples().tolist()) == sorted(
        c.size for s in stories for c in s.cascades)
    for name in CORPUS_METRICS:
        if name != "global_cascade_size":
            assert dists[name].total == 500


def test_distribution_csv_round_trip(tmp_path, fixture_dag):
    dist = corpus_distributions([story_metrics(fixture_dag)] * 3)["normalized_community_value"]
    p = tmp_path / "ncv.csv"
    write_distribution_csv(dist, p)
    assert p.read_text().splitlines()[0] == "value,count,ccdf"
    back = read_distribution_csv(p)
    assert back.name == "ncv"
    assert back.histogram == dist.histogram
