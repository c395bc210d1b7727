"""A biased 8-cell table, step by step.

Y = {0, 1}, S = {a, b}, X = {u, v}.  Group a gets label 1 four times as often
as group b, while X carries no information at all.  We build the fairness
constraints, watch IPF fit them one marginal at a time, and check that the
result has no disparity left.
"""

import numpy as np

from purfit import (
    JointTable,
    Schema,
    attributable_disparity,
    build_constraints,
    conditional,
    ipf_steps,
    kl_divergence,
    parity_residual,
    project,
)

schema = Schema.from_dict(
    {
        "response": {"name": "y", "categories": ["0", "1"]},
        "protected": [{"name": "s", "categories": ["a", "b"]}],
        "unprotected": [{"name": "x", "categories": ["u", "v"]}],
    }
)
g = np.array([[0.1, 0.4], [0.4, 0.1]])  # g[y, s]
f = JointTable.from_tensor(schema, np.repeat(g[:, :, None] * 0.5, 2, axis=2))

print("p(y | s) in the data:")
print(conditional(f, ["y"], ["s"]).values.round(3))
print("parity residual:", parity_residual(f))

cset = build_constraints(f, "PUR")
for c in cset:
    print(f"{c.kind:8s} over {c.features}: target\n{c.target}")

# a few raw IPF steps; the iterate is the solver's working tensor
steps = ipf_steps(f, cset)
for _ in range(3):
    c, it = next(steps)
    print(f"after fitting {c.kind}: cells = {it.reshape(-1).round(4)}")

q, diag = project(f, cset)
print("\nprojection:", q.values)
print("cycles:", diag.cycles_used, " residual:", diag.final_residual)
print("KL(q || f) =", round(kl_divergence(q, f), 6), "nats")
print("attributable disparity vs s=a:\n", attributable_disparity(q, "a").differences)
