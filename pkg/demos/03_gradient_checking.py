"""Trust but verify: finite differences against the hand-written backward.

Central differences at 64-bit are an independent oracle: they know nothing
about the backward code, only how to wiggle one parameter at a time.
Run:  python demos/03_gradient_checking.py
"""

import numpy as np

from spinalfc import HeadConfig, VARIANTS, build_head, check_gradients, check_head
from spinalfc.rng import check_rng, init_rng

rng = check_rng(0)
x = rng.standard_normal((3, 12))
labels = rng.integers(0, 4, size=3)

# ---------------------------------------------------------------------------
# All three variants at small dims: every parameter matches to ~1e-7.
# ---------------------------------------------------------------------------
for variant in VARIANTS:
    config = HeadConfig(variant, input_dim=12, hidden=6, depth=3, classes=4)
    report = check_head(config, (x, labels))
    print(f"== {variant} ==")
    print(report.format_table())
    print()

# ---------------------------------------------------------------------------
# The oracle catches bugs: corrupt one layer's gradient routing and the
# worst coordinate lands inside exactly that layer.
# ---------------------------------------------------------------------------
config = HeadConfig("progressive", 12, 6, 3, 4)
head = build_head(config, init_rng(0), dtype=np.float64)
true_backward = head.backward


def buggy_backward(grad_logits):
    true_backward(grad_logits)
    head.hidden_layers[1].dW[...] = np.roll(head.hidden_layers[1].dW, 1, axis=0)


head.backward = buggy_backward
report = check_gradients(head, x, labels)
name, index = report.worst
print("== deliberately corrupted hidden2 routing ==")
print(f"check passed: {report.passed}; worst coordinate: {name}[{index}]")
