"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (echoed in the terminal summary
and printed under ``-s``) before asserting, so a failing criterion still
reports what was measured.
"""
import math
import random
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES, random_instance
from cascadekit.cascade import (
    build_activation_dag,
    extract_cascades,
    identify_seeds,
    principal_cascade,
    sample_observed_depths,
)
from cascadekit.cli import analyze
from cascadekit.events import load_activation_log, validate_sequence
from cascadekit.fitting import compare_fits, fit_lognormal, fit_powerlaw, fit_weibull
from cascadekit.graph import FollowerGraph, load_follower_graph
from cascadekit.metrics import story_metrics
from cascadekit.sim import (
    ContagionConfig,
    GraphConfig,
    PromotionConfig,
    generate_graph,
    graph_rng,
    run_independent_cascade,
    run_promotion_experiment,
    simulate_corpus,
    story_rng,
    write_corpus,
)

N_INSTANCES = 1000


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def seq_of(order, story="s"):
    return validate_sequence(story, [(u, t) for t, u in enumerate(order)])[0]


@pytest.fixture(scope="module")
def instances():
    rng = random.Random(20240)
    out = []
    for _ in range(N_INSTANCES):
        edges, order = random_instance(rng)
        d = build_activation_dag(FollowerGraph.from_edges(edges), seq_of(order))
        out.append((edges, order, d))
    return out


# 1 ---------------------------------------------------------------------------

def test_fixture_exactness(tmp_path):
    t0 = time.perf_counter()
    (tmp_path / "g.tsv").write_text("3 1\n4 1\n4 2\n5 2\n6 1\n6 3\n7 1\n")
    (tmp_path / "log.csv").write_text(
        "story_id,user_id,timestamp\n" + "".join(f"fig4,{u},{u * 10}\n" for u in range(1, 8)))
    g = load_follower_graph(tmp_path / "g.tsv")
    seq = load_activation_log(tmp_path / "log.csv", graph=g)["fig4"]
    d = build_activation_dag(g, seq)
    m = story_metrics(d)
    cs = extract_cascades(d)
    elapsed = time.perf_counter() - t0

    k = [c.seed for c in cs].index(2)
    red, red_m = cs[k], m.cascades[k]
    got = {
        "members": set(principal_cascade(d).members),
        "seeds": identify_seeds(d),
        "max_d": m.principal.max_diameter,
        "min_d": m.principal.min_diameter,
        "spread": m.principal.spread,
        "red_spread": red_m.spread,
        "cv": m.community_value,
        "split": sorted((c.src.size for c in cs), reverse=True),
    }
    want = {"members": {1, 3, 4, 6, 7}, "seeds": [1, 2], "max_d": 2, "min_d": 1, "spread": 4,
            "red_spread": 2, "cv": 7, "split": [5, 2]}
    ok = got == want and red.members == {2, 4, 5} and elapsed < 1.0
    record(1, "fixture exactness", ok, f"{got} in {elapsed:.3f}s")


# 2 ---------------------------------------------------------------------------

def test_oracle_equivalence(instances):
    t0 = time.perf_counter()
    mismatches = []
    for k, (edges, order, d) in enumerate(instances):
        want_edges = oracles.dag_edges(edges, order)
        want_seeds = oracles.seeds(order, want_edges)
        want_cs = oracles.cascades(order, want_edges)
        want = oracles.story_metrics(order, want_edges)
        m = story_metrics(d)
        cs = extract_cascades(d)
        got_cs = [(c.seed, set(c.members), c.edges) for c in cs]
        pm = oracles.cascade_metrics(*next(c for c in want_cs if c[0] == order[0]))
        checks = [
            d.edges() == want_edges,
            identify_seeds(d) == want_seeds,
            got_cs == [(s, mem, e) for s, mem, e in want_cs],
            [{"size": c.size, "max_diameter": c.max_diameter, "min_diameter": c.min_diameter,
              "spread": c.spread} for c in m.cascades] == want["per"],
            [c.seed for c in m.cascades] == want_seeds,
            m.activated == len(order) and m.n_seeds == len(want_seeds),
            m.largest_cascade_size == want["largest_cascade_size"],
            m.global_max_diameter == want["global_max_diameter"],
            m.global_min_diameter == want["global_min_diameter"],
            m.global_spread == want["global_spread"],
            m.community_value == want["community_value"],
            m.normalized_community_value == want["normalized_community_value"],
            {"size": m.principal.size, "max_diameter": m.principal.max_diameter,
             "min_diameter": m.principal.min_diameter, "spread": m.principal.spread} == pm,
        ]
        if not all(checks):
            mismatches.append(k)
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 30
    record(2, "oracle equivalence", ok,
           f"{N_INSTANCES - len(mismatches)}/{N_INSTANCES} instances match in {elapsed:.1f}s")


# 3 ---------------------------------------------------------------------------

def test_metric_invariants(instances):
    violations = 0
    for _, order, d in instances:
        m = story_metrics(d)
        for c in (*m.cascades, m.principal):
            violations += not (0 <= c.min_diameter <= c.max_diameter <= c.size - 1)
        bound = (m.activated - m.n_seeds) / m.activated
        deg = d.in_degree()
        tight = bool(np.all(deg[deg > 0] == 1))
        violations += not (m.normalized_community_value >= bound - 1e-12)
        violations += (abs(m.normalized_community_value - bound) < 1e-12) != tight
        union = set().union(*(c.members for c in extract_cascades(d)))
        violations += union != set(order)
    record(3, "metric invariants", violations == 0, f"{violations} violations over {N_INSTANCES} instances")


# 4 ---------------------------------------------------------------------------

def test_fit_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    reps = 100
    wins = {"lognormal": 0, "powerlaw": 0, "weibull": 0}
    errs = {"mu": [], "sigma": [], "alpha": [], "shape": []}
    for _ in range(reps):
        x = rng.lognormal(math.log(614), 0.8, 10_000)
        r = fit_lognormal(x)
        errs["mu"].append(abs(r.params["mu"] - math.log(614)))
        errs["sigma"].append(abs(r.params["sigma"] - 0.8))
        wins["lognormal"] += compare_fits(x)[0].family == "lognormal"

        x = (1.0 - rng.random(10_000)) ** (-1.0 / 1.5)  # Pareto alpha=2.5, xmin=1
        errs["alpha"].append(abs(fit_powerlaw(x).params["alpha"] - 2.5))
        wins["powerlaw"] += compare_fits(x)[0].family == "powerlaw"

        x = 100.0 * rng.weibull(0.6, 10_000)
        errs["shape"].append(abs(fit_weibull(x).params["shape"] - 0.6))
        wins["weibull"] += compare_fits(x)[0].family == "weibull"
    elapsed = time.perf_counter() - t0
    tol = {"mu": 0.03, "sigma": 0.03, "alpha": 0.05, "shape": 0.02}
    # recovery is judged on a single draw (the first); the rest show the spread
    first_ok = all(errs[k][0] <= tol[k] for k in tol)
    within = {k: sum(e <= tol[k] for e in errs[k]) for k in tol}
    ranked = all(w >= 0.95 * reps for w in wins.values())
    ok = first_ok and ranked and elapsed < 60
    record(4, "fit recovery", ok,
           f"first-draw errors {({k: round(v[0], 4) for k, v in errs.items()})}, "
           f"draws within tolerance {within}/{reps}, generating family first {wins}/{reps}, "
           f"{elapsed:.1f}s")


# 5 ---------------------------------------------------------------------------

PROMOTION_GRAPH = GraphConfig("uniform-random", 10_000, 10.0)
PROMOTION_CONTAGION = ContagionConfig(p=0.09, n_stories=1000, promotion=PromotionConfig(40, 0.0005, 30))


def test_promotion_experiment():
    t0 = time.perf_counter()
    g = generate_graph(PROMOTION_GRAPH, 1)
    corpus = run_promotion_experiment(g, PROMOTION_CONTAGION, 0)
    sizes = np.array([s.size for s in corpus.stories], dtype=float)
    promoted = np.array([s.promoted for s in corpus.stories])

    def ks(x):
        return {r.family: r.ks for r in compare_fits(x, ("lognormal", "powerlaw"))}

    full, sub = ks(sizes), ks(sizes[promoted])
    heavier = full["powerlaw"] < full["lognormal"] and sub["lognormal"] <= sub["powerlaw"]

    before, after = [], []
    for s in corpus.stories:
        if s.promoted:
            t = s.promotion_time
            before.extend(s.per_step[max(0, t - 4):t + 1])
            after.extend(s.per_step[t + 1:t + 6])
    slope = np.mean(after) > np.mean(before)
    frac = promoted.mean()
    elapsed = time.perf_counter() - t0
    ok = heavier and slope and 0.025 <= frac <= 0.10 and elapsed < 300
    record(5, "promotion experiment", ok,
           f"{promoted.sum()} promoted ({frac:.1%}); full KS powerlaw {full['powerlaw']:.3f} "
           f"vs lognormal {full['lognormal']:.3f}; promoted KS lognormal {sub['lognormal']:.3f} "
           f"vs powerlaw {sub['powerlaw']:.3f}; activations/step {np.mean(before):.1f} before, "
           f"{np.mean(after):.1f} after promotion; {elapsed:.1f}s")


# 6 ---------------------------------------------------------------------------

def test_independent_cascade_sanity():
    g = generate_graph(GraphConfig("uniform-random", 400, 2.0), 6)
    p0 = all(set(run_independent_cascade(g, [s, s + 1], 0.0, s).users) == {s, s + 1}
             for s in range(0, 399, 7))

    def closure(seed):
        seen, stack = {seed}, [seed]
        while stack:
            for u in g.follower_indices(stack.pop()).tolist():
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    p1 = all(set(run_independent_cascade(g, [s], 1.0, s).users) == closure(s) for s in range(0, 399, 7))

    m, p, trials = 40, 0.3, 10_000
    star = FollowerGraph.from_edges([(i, 0) for i in range(1, m + 1)])
    sizes = np.array([len(run_independent_cascade(star, [0], p, story_rng(6, t))) for t in range(trials)])
    sd = math.sqrt(m * p * (1 - p) / trials)
    star_ok = abs(sizes.mean() - (1 + p * m)) <= 3 * sd
    record(6, "independent-cascade sanity", p0 and p1 and star_ok,
           f"p=0 seeds only: {p0}; p=1 reachable sets: {p1}; star mean {sizes.mean():.3f} "
           f"vs {1 + p * m:.1f} +/- {3 * sd:.3f}")


# 7 ---------------------------------------------------------------------------

def test_observed_tree_property(instances):
    nrng = np.random.default_rng(7)
    violations = 0
    for _, _, d in instances:
        n = d.n_nodes
        edges = d.edges()
        pos = {u: i for i, u in enumerate(d.nodes)}
        short = np.full((n, n), -1)
        long_ = np.full((n, n), -1)
        for r in d.seed_positions().tolist():
            root = d.nodes[r]
            for u, k in oracles.bfs_dist([root], edges).items():
                short[r, pos[u]] = k
                long_[r, pos[u]] = oracles.longest_between(root, u, edges)
        root, depth = sample_observed_depths(d, nrng, 1000)
        cols = np.arange(n)
        lo, hi = short[root, cols], long_[root, cols]
        violations += int(np.sum((lo < 0) | (depth < lo) | (depth > hi)))

    g = generate_graph(GraphConfig("community-blocks", 2000, 20.0, n_blocks=10, intra_fraction=0.95),
                       graph_rng(0))
    corpus = simulate_corpus(g, ContagionConfig(p=0.1, n_stories=200), 0)
    deep, shallow = [], []
    for s in corpus.stories:
        d = build_activation_dag(g, s.sequence)
        root, depth = sample_observed_depths(d, nrng, 20)
        r = d.position(d.submitter)
        deep.append(np.where(root == r, depth, 0).max(axis=1).mean())
        shallow.append(story_metrics(d).principal.min_diameter)
    dense_ok = np.mean(deep) > np.mean(shallow)
    record(7, "observed-tree property", violations == 0 and dense_ok,
           f"{violations} depth-bound violations over {N_INSTANCES}x1000 trees; community-dense corpus "
           f"mean sampled-tree depth {np.mean(deep):.2f} vs mean min diameter {np.mean(shallow):.2f}")


# 8 ---------------------------------------------------------------------------

def test_throughput(tmp_path):
    gcfg = GraphConfig("uniform-random", 10_000, 10.0)
    g = generate_graph(gcfg, graph_rng(8))
    corpus = simulate_corpus(g, ContagionConfig(p=0.11, seeds_per_story=5, n_stories=100), 8)
    write_corpus(tmp_path / "sim", g, corpus, gcfg)
    activations = sum(s.size for s in corpus.stories)
    t0 = time.perf_counter()
    summary = analyze(tmp_path / "sim" / "graph.tsv", tmp_path / "sim" / "log.csv", tmp_path / "out", jobs=1)
    elapsed = time.perf_counter() - t0
    ok = summary["stories"] == 100 and 5e4 <= activations <= 2e5 and elapsed < 10
    record(8, "throughput", ok,
           f"{summary['stories']} stories, {activations} activations, {g.n_edges} edges "
           f"analyzed in {elapsed:.2f}s on one worker")
