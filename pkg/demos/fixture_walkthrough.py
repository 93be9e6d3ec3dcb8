"""
Cascades of a seven-user story
==============================

Two users vote independently and their followers pick the story up.  We
build the activation DAG, split it into cascades and measure them.
"""

# %%
# The follower graph: an edge (u, v) means u follows v.
from cascadekit import FollowerGraph, build_activation_dag, extract_cascades, story_metrics
from cascadekit.events import validate_sequence

g = FollowerGraph.from_edges([(3, 1), (4, 1), (4, 2), (5, 2), (6, 1), (6, 3), (7, 1)])
print(g.summary())

# %%
# Users vote in order 1..7.  A vote is linked to every earlier vote of a followee.
seq, _ = validate_sequence("toy", [(u, t) for t, u in enumerate(range(1, 8))])
dag = build_activation_dag(g, seq)
print("activation edges:", sorted(dag.edges()))

# %%
# Seeds have no incoming activation edge; each seeds one cascade.
for c in extract_cascades(dag):
    print(f"seed {c.seed}: members {sorted(c.members)}, {len(c.edges)} edges")

# %%
# User 4 sits in both cascades.  Story-level numbers:
m = story_metrics(dag)
p = m.principal
print(f"principal cascade: size {p.size}, max diameter {p.max_diameter}, "
      f"min diameter {p.min_diameter}, spread {p.spread}")
print(f"community value {m.community_value}, normalized {m.normalized_community_value:.2f}")
