"""
Deep, narrow observed cascades
==============================

If each voter records only one of the followees it saw the story from, the
observed cascade is a tree sampled from the activation DAG.  On a dense,
clustered graph those trees come out much deeper than the DAG's shortest
paths suggest.
"""

# %%
import numpy as np

from cascadekit import ContagionConfig, GraphConfig, build_activation_dag, generate_graph, simulate_corpus
from cascadekit import sample_observed_depths, story_metrics

g = generate_graph(GraphConfig("community-blocks", 2000, 20.0, n_blocks=10, intra_fraction=0.95), 0)
corpus = simulate_corpus(g, ContagionConfig(p=0.1, n_stories=200), seed=0)

# %%
rng = np.random.default_rng(0)
rows = []
for s in corpus.stories:
    d = build_activation_dag(g, s.sequence)
    m = story_metrics(d).principal
    root, depth = sample_observed_depths(d, rng, 20)
    r = d.position(d.submitter)
    tree = np.where(root == r, depth, 0).max(axis=1).mean()
    rows.append((m.size, m.min_diameter, tree, m.max_diameter))

size, shortest, tree, longest = np.array(rows).T
print(f"mean principal size {size.mean():.1f}")
print(f"mean min diameter {shortest.mean():.2f}, sampled tree depth {tree.mean():.2f}, "
      f"max diameter {longest.mean():.2f}")
