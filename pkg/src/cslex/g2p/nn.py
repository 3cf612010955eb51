"""Numpy building blocks with hand-written backward passes.

Every ``*_forward`` returns ``(out, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns input gradients,
accumulating parameter gradients into a ``grads`` dict.
"""

from __future__ import annotations

import numpy as np

from cslex.errors import ShapeMismatch


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=axis, keepdims=True))


def causal_mask(t: int) -> np.ndarray:
    return np.tril(np.ones((t, t), dtype=bool))


def attention(Q, K, V, mask=None, return_weights=False):
    """Scaled dot-product attention, ``softmax(Q K^T / sqrt(d_k)) V``.

    Works on 2-D matrices or stacks of them (leading batch/head axes).
    ``mask`` is boolean, broadcastable to the score matrix, True = attend;
    masked keys get exactly zero weight.
    """
    Q, K, V = np.asarray(Q), np.asarray(K), np.asarray(V)
    if Q.shape[-1] != K.shape[-1]:
        raise ShapeMismatch(f"query dim {Q.shape[-1]} != key dim {K.shape[-1]}")
    if K.shape[-2] != V.shape[-2]:
        raise ShapeMismatch(f"{K.shape[-2]} keys but {V.shape[-2]} values")
    d_k = Q.shape[-1]
    scores = Q @ np.swapaxes(K, -1, -2) / np.sqrt(d_k)
    if mask is not None:
        scores = np.where(mask, scores, -np.inf)
    w = softmax(scores)
    out = w @ V
    return (out, w) if return_weights else out


def attention_backward(dout, Q, K, V, w):
    d_k = Q.shape[-1]
    dV = np.swapaxes(w, -1, -2) @ dout
    dw = dout @ np.swapaxes(V, -1, -2)
    ds = w * (dw - np.sum(dw * w, axis=-1, keepdims=True))
    ds = ds / np.sqrt(d_k)
    dQ = ds @ K
    dK = np.swapaxes(ds, -1, -2) @ Q
    return dQ, dK, dV


def _split(x, heads):
    b, t, d = x.shape
    return x.reshape(b, t, heads, d // heads).transpose(0, 2, 1, 3)


def _merge(x):
    b, h, t, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dk)


def multi_head(Q, K, V, params, heads, mask=None):
    """``Concat(head_1..head_h) W^O`` with ``head_i = Attention(Q W_i^Q, K W_i^K, V W_i^V)``.

    ``params`` holds ``wq``, ``wk``, ``wv`` (model_dim x model_dim, head i
    owning columns ``i*d_k:(i+1)*d_k``) and ``wo``.  Accepts (T, D) or (B, T, D).
    """
    squeeze = np.ndim(Q) == 2
    if squeeze:
        Q, K, V = Q[None], K[None], V[None]
    d = params["wq"].shape[0]
    if Q.shape[-1] != d or K.shape[-1] != d or V.shape[-1] != d:
        raise ShapeMismatch(f"inputs must have model_dim={d}")
    if d % heads:
        raise ShapeMismatch(f"model_dim {d} not divisible by {heads} heads")
    if mask is not None and np.ndim(mask) == 3:
        mask = mask[:, None]
    q = _split(Q @ params["wq"], heads)
    k = _split(K @ params["wk"], heads)
    v = _split(V @ params["wv"], heads)
    out = _merge(attention(q, k, v, mask)) @ params["wo"]
    return out[0] if squeeze else out


def mha_forward(xq, xkv, p, prefix, heads, mask):
    """Batched multi-head attention; ``mask`` is (B|1, Tq, Tk) boolean."""
    wq, wk, wv, wo = (p[prefix + n] for n in ("wq", "wk", "wv", "wo"))
    q = _split(xq @ wq, heads)
    k = _split(xkv @ wk, heads)
    v = _split(xkv @ wv, heads)
    ctx, w = attention(q, k, v, mask[:, None], return_weights=True)
    merged = _merge(ctx)
    out = merged @ wo
    return out, (xq, xkv, q, k, v, w, merged, prefix, heads)


def mha_backward(dout, cache, p, grads):
    xq, xkv, q, k, v, w, merged, prefix, heads = cache
    grads[prefix + "wo"] += np.einsum("bti,btj->ij", merged, dout)
    dmerged = dout @ p[prefix + "wo"].T
    dq, dk, dv = attention_backward(_split(dmerged, heads), q, k, v, w)
    dq, dk, dv = _merge(dq), _merge(dk), _merge(dv)
    grads[prefix + "wq"] += np.einsum("bti,btj->ij", xq, dq)
    grads[prefix + "wk"] += np.einsum("bti,btj->ij", xkv, dk)
    grads[prefix + "wv"] += np.einsum("bti,btj->ij", xkv, dv)
    dxq = dq @ p[prefix + "wq"].T
    dxkv = dk @ p[prefix + "wk"].T + dv @ p[prefix + "wv"].T
    return dxq, dxkv


def layer_norm_forward(x, p, prefix, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return xhat * p[prefix + "g"] + p[prefix + "b"], (xhat, inv, prefix)


def layer_norm_backward(dy, cache, p, grads):
    xhat, inv, prefix = cache
    grads[prefix + "g"] += np.sum(dy * xhat, axis=tuple(range(dy.ndim - 1)))
    grads[prefix + "b"] += np.sum(dy, axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * p[prefix + "g"]
    n = xhat.shape[-1]
    return inv / n * (n * dxhat - dxhat.sum(axis=-1, keepdims=True)
                      - xhat * np.sum(dxhat * xhat, axis=-1, keepdims=True))


def ffn_forward(x, p, prefix):
    h = x @ p[prefix + "w1"] + p[prefix + "b1"]
    a = np.maximum(h, 0.0)
    return a @ p[prefix + "w2"] + p[prefix + "b2"], (x, h, a, prefix)


def ffn_backward(dout, cache, p, grads):
    x, h, a, prefix = cache
    grads[prefix + "w2"] += np.einsum("bti,btj->ij", a, dout)
    grads[prefix + "b2"] += dout.sum(axis=(0, 1))
    da = dout @ p[prefix + "w2"].T
    dh = da * (h > 0)
    grads[prefix + "w1"] += np.einsum("bti,btj->ij", x, dh)
    grads[prefix + "b1"] += dh.sum(axis=(0, 1))
    return dh @ p[prefix + "w1"].T


def sinusoidal_positions(t: int, d: int) -> np.ndarray:
    pos = np.arange(t)[:, None]
    i = np.arange(d)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
