"""Gated recurrent temperature network, implemented directly on numpy.

A stack of gated recurrent layers feeds an affine head that maps the last
hidden state to one normalized output. Conventions (row vectors, batch
first in each timestep slice):

    z = sigmoid(x W_z + h U_z + b_z)          update gate
    r = sigmoid(x W_r + h U_r + b_r)          reset gate
    c = tanh(x W_c + (r * h) U_c + b_c)       candidate state
    h' = (1 - z) * h + z * c

With all weights zero both gates are 0.5 and the candidate is 0, so the
hidden state halves every step - a closed form the tests lean on.

The backward pass is a hand-derived backpropagation through time that
returns a gradient for every weight tensor; it is checked against central
finite differences.
"""

import numpy as np

from .errors import DimensionMismatch

PARAM_NAMES = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_c", "u_c", "b_c")


def sigmoid(x):
    # Piecewise form avoids exp overflow for large negative inputs.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def orthogonal_matrix(rng, n):
    """Random orthogonal matrix with a pinned sign convention."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


class GruLayer:
    """One gated recurrent layer; holds nine weight tensors."""

    def __init__(self, input_size, hidden_size, rng=None):
        self.input_size = input_size
        self.hidden_size = hidden_size
        if rng is None:
            self.w_z = np.zeros((input_size, hidden_size))
            self.u_z = np.zeros((hidden_size, hidden_size))
            self.w_r = np.zeros((input_size, hidden_size))
            self.u_r = np.zeros((hidden_size, hidden_size))
            self.w_c = np.zeros((input_size, hidden_size))
            self.u_c = np.zeros((hidden_size, hidden_size))
            self.b_z = np.zeros(hidden_size)
        else:
            # Glorot input weights, orthogonal recurrent weights, and the
            # update gate biased open (+1) so depth does not mute signal
            # early in training.
            bound_in = np.sqrt(6.0 / (input_size + hidden_size))
            self.w_z = rng.uniform(-bound_in, bound_in, (input_size, hidden_size))
            self.u_z = orthogonal_matrix(rng, hidden_size)
            self.w_r = rng.uniform(-bound_in, bound_in, (input_size, hidden_size))
            self.u_r = orthogonal_matrix(rng, hidden_size)
            self.w_c = rng.uniform(-bound_in, bound_in, (input_size, hidden_size))
            self.u_c = orthogonal_matrix(rng, hidden_size)
            self.b_z = np.ones(hidden_size)
        self.b_r = np.zeros(hidden_size)
        self.b_c = np.zeros(hidden_size)

    def forward(self, xs, h0=None):
        """Run the recurrence over a (T, batch, input) sequence.

        Returns the (T, batch, hidden) outputs and a cache for backward.
        """
        T, batch, nin = xs.shape
        if nin != self.input_size:
            raise DimensionMismatch(
                f"layer expects {self.input_size} inputs, got {nin}")
        hs = np.empty((T + 1, batch, self.hidden_size))
        hs[0] = 0.0 if h0 is None else h0
        zs = np.empty((T, batch, self.hidden_size))
        rs = np.empty_like(zs)
        cs = np.empty_like(zs)
        ss = np.empty_like(zs)
        for t in range(T):
            x, h = xs[t], hs[t]
            zs[t] = sigmoid(x @ self.w_z + h @ self.u_z + self.b_z)
            rs[t] = sigmoid(x @ self.w_r + h @ self.u_r + self.b_r)
            ss[t] = rs[t] * h
            cs[t] = np.tanh(x @ self.w_c + ss[t] @ self.u_c + self.b_c)
            hs[t + 1] = (1.0 - zs[t]) * h + zs[t] * cs[t]
        cache = (xs, hs, zs, rs, cs, ss)
        return hs[1:], cache

    def backward(self, cache, grad_out):
        """Backpropagate (T, batch, hidden) output gradients through time.

        Returns (parameter gradients, input-sequence gradients).
        """
        xs, hs, zs, rs, cs, ss = cache
        T = xs.shape[0]
        grads = {name: np.zeros_like(getattr(self, name)) for name in PARAM_NAMES}
        grad_xs = np.empty_like(xs)
        gh = np.zeros_like(hs[0])
        for t in range(T - 1, -1, -1):
            g = grad_out[t] + gh
            x, h, z, r, c, s = xs[t], hs[t], zs[t], rs[t], cs[t], ss[t]
            ga_c = g * z * (1.0 - c * c)
            gs = ga_c @ self.u_c.T
            ga_r = gs * h * r * (1.0 - r)
            ga_z = g * (c - h) * z * (1.0 - z)
            grads["w_z"] += x.T @ ga_z
            grads["u_z"] += h.T @ ga_z
            grads["b_z"] += ga_z.sum(axis=0)
            grads["w_r"] += x.T @ ga_r
            grads["u_r"] += h.T @ ga_r
            grads["b_r"] += ga_r.sum(axis=0)
            grads["w_c"] += x.T @ ga_c
            grads["u_c"] += s.T @ ga_c
            grads["b_c"] += ga_c.sum(axis=0)
            grad_xs[t] = ga_z @ self.w_z.T + ga_r @ self.w_r.T + ga_c @ self.w_c.T
            gh = (g * (1.0 - z) + gs * r
                  + ga_z @ self.u_z.T + ga_r @ self.u_r.T)
        return grads, grad_xs


class FeatureNorm:
    """Min-max scaling of the input features and the target."""

    def __init__(self, feature_min, feature_max, target_min, target_max):
        self.feature_min = np.asarray(feature_min, dtype=float)
        self.feature_max = np.asarray(feature_max, dtype=float)
        self.target_min = float(target_min)
        self.target_max = float(target_max)

    @classmethod
    def fit(cls, features, targets):
        """features: (n, ..., n_features) stacked raw inputs."""
        flat = features.reshape(-1, features.shape[-1])
        return cls(flat.min(axis=0), flat.max(axis=0),
                   float(np.min(targets)), float(np.max(targets)))

    def _span(self, lo, hi):
        span = hi - lo
        return np.where(span == 0.0, 1.0, span) if np.ndim(span) else (span or 1.0)

    def normalize_features(self, x):
        return (x - self.feature_min) / self._span(self.feature_min, self.feature_max)

    def normalize_target(self, y):
        return (y - self.target_min) / self._span(self.target_min, self.target_max)

    def denormalize_target(self, y):
        return y * self._span(self.target_min, self.target_max) + self.target_min


class GruModel:
    """Layer stack plus affine output head and normalization constants."""

    def __init__(self, layers, w_out, b_out, norm):
        for lower, upper in zip(layers, layers[1:]):
            if lower.hidden_size != upper.input_size:
                raise DimensionMismatch("layer widths do not chain")
        if w_out.shape[0] != layers[-1].hidden_size:
            raise DimensionMismatch("output head does not match last layer")
        self.layers = layers
        self.w_out = w_out          # (hidden_last,)
        self.b_out = b_out          # scalar
        self.norm = norm

    @classmethod
    def create(cls, n_features, hidden_sizes, norm, seed=0, zero=False):
        rng = None if zero else np.random.default_rng(seed)
        layers = []
        size_in = n_features
        for size in hidden_sizes:
            layers.append(GruLayer(size_in, size, rng))
            size_in = size
        if zero:
            w_out = np.zeros(size_in)
        else:
            bound = np.sqrt(6.0 / (size_in + 1))
            w_out = rng.uniform(-bound, bound, size_in)
        return cls(layers, w_out, 0.0, norm)

    @property
    def hidden_sizes(self):
        return tuple(layer.hidden_size for layer in self.layers)

    def forward_normalized(self, xs, keep_cache=False):
        """xs: (T, batch, n_features), already normalized.

        Returns (batch,) normalized predictions (and caches if asked).
        """
        caches = []
        h = xs
        for layer in self.layers:
            h, cache = layer.forward(h)
            caches.append(cache)
        y = h[-1] @ self.w_out + self.b_out
        if keep_cache:
            return y, (caches, h)
        return y

    def backward(self, cache, grad_y):
        """Gradients of a scalar objective given d(objective)/d(prediction).

        grad_y: (batch,). Returns {"layers": [per-layer dict...],
        "w_out": ..., "b_out": ...}.
        """
        caches, top_h = cache
        batch = grad_y.shape[0]
        gw_out = top_h[-1].T @ grad_y
        gb_out = grad_y.sum()
        grad_seq = np.zeros_like(top_h)
        grad_seq[-1] = np.outer(grad_y, self.w_out)
        layer_grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            layer_grads[i], grad_seq = self.layers[i].backward(caches[i], grad_seq)
        return {"layers": layer_grads, "w_out": gw_out, "b_out": gb_out}

    def predict_sequence(self, features):
        """One raw (T, n_features) sequence -> temperature in Celsius."""
        xs = np.asarray(features, dtype=float)
        if xs.ndim != 2:
            raise DimensionMismatch("sequence must be (steps, features)")
        xn = self.norm.normalize_features(xs)[:, None, :]
        y = self.forward_normalized(xn)
        return float(self.norm.denormalize_target(y[0]))

    def predict_batch(self, features):
        """(n, T, n_features) raw windows -> (n,) temperatures in Celsius."""
        xs = np.asarray(features, dtype=float)
        xn = self.norm.normalize_features(xs).transpose(1, 0, 2)
        y = self.forward_normalized(xn)
        return self.norm.denormalize_target(y)

    def iter_params(self):
        """Yield (name, array) for every trainable tensor (views, in a fixed
        order); biases and the output head included."""
        for i, layer in enumerate(self.layers):
            for name in PARAM_NAMES:
                yield f"layers[{i}].{name}", getattr(layer, name)
        yield "w_out", self.w_out
        yield "b_out", self.b_out


def gru_forward(model, sequence):
    """Functional entry point: raw feature sequence in, degrees C out."""
    return model.predict_sequence(sequence)


def finite_difference_gradients(model, xs, step=1e-5):
    """Central finite differences of the summed normalized output with
    respect to every weight tensor. Slow; for verification only."""
    def objective():
        return float(np.sum(model.forward_normalized(xs)))

    out = {}
    for name, param in model.iter_params():
        if name == "b_out":
            model.b_out += step
            hi = objective()
            model.b_out -= 2 * step
            lo = objective()
            model.b_out += step
            out[name] = (hi - lo) / (2 * step)
            continue
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + step
            hi = objective()
            param[idx] = orig - step
            lo = objective()
            param[idx] = orig
            grad[idx] = (hi - lo) / (2 * step)
            it.iternext()
        out[name] = grad
    return out


def analytic_gradients(model, xs):
    """Analytic counterpart of finite_difference_gradients (same keys)."""
    y, cache = model.forward_normalized(xs, keep_cache=True)
    grads = model.backward(cache, np.ones_like(y))
    out = {}
    for i, layer_grads in enumerate(grads["layers"]):
        for name in PARAM_NAMES:
            out[f"layers[{i}].{name}"] = layer_grads[name]
    out["w_out"] = grads["w_out"]
    out["b_out"] = grads["b_out"]
    return out
