"""Layer primitives by hand: affine map, ReLU, inverted dropout, NLL loss.

Everything in this package reduces to these four pieces plus a wiring rule.
Run from the repository root:  python demos/01_layers_and_loss.py
"""

import numpy as np

from spinalfc import Dropout, Relu, init_layer, nll_loss
from spinalfc.rng import dropout_rng, init_rng

# ---------------------------------------------------------------------------
# A linear layer is W (in x out), a bias row, and gradient buffers.
# ---------------------------------------------------------------------------
layer = init_layer(in_dim=3, out_dim=2, rng=init_rng(0), dtype=np.float64)
print("W =\n", layer.W)
print("b =", layer.b)

x = np.array([[1.0, 0.5, -0.25], [0.0, 2.0, 1.0]])
out = layer.forward(x)
print("\nforward(x) =\n", out)

# Backward accumulates dW = x^T g and db = column sums, and returns g W^T.
grad_out = np.ones_like(out)
grad_in = layer.backward(grad_out)
print("\ndW =\n", layer.dW)
print("db =", layer.db)
print("gradient passed to the input:\n", grad_in)

# ---------------------------------------------------------------------------
# ReLU gates gradients with the sign mask it saw on the way forward;
# the subgradient at exactly zero is fixed to zero.
# ---------------------------------------------------------------------------
relu = Relu()
z = np.array([[-1.0, 0.0, 2.0]])
print("\nrelu([-1, 0, 2]) =", relu.forward(z))
print("relu backward of ones =", relu.backward(np.ones_like(z)))

# ---------------------------------------------------------------------------
# Inverted dropout: in train mode survivors are scaled by 1/(1-p), so the
# expectation is preserved and eval-mode forward is the identity.
# ---------------------------------------------------------------------------
drop = Dropout(0.5)
ones = np.ones((4, 8))
masked = drop.forward(ones, dropout_rng(0))
print("\ntrain-mode dropout of ones (p=0.5):\n", masked)
drop.mode = "eval"
print("eval-mode dropout is identity:", bool((drop.forward(ones) == ones).all()))

# ---------------------------------------------------------------------------
# The loss: log-softmax + negative log-likelihood, with max subtraction so
# huge logits cannot overflow. Returns the logit gradient alongside.
# ---------------------------------------------------------------------------
logits = np.zeros((1, 10))
loss, grad = nll_loss(logits, np.array([3]))
print(f"\nuniform logits over 10 classes: loss = {loss:.6f} (= ln 10)")
print("gradient row (softmax minus one-hot, / batch):\n", grad)

logits[0, 3] = 1000.0
loss, _ = nll_loss(logits, np.array([3]))
print(f"confident correct logit +1000: loss = {loss:.2e}, no overflow")
