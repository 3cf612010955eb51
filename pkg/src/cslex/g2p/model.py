"""Character-to-phoneme transformer (encoder-decoder), trained with SGD.

Desk scale: float64 numpy, no dropout, sinusoidal positions, pre-norm
residual blocks by default (``pre_norm=False`` gives the original post-norm
layout).
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from cslex.errors import EmptyLexicon, NonFiniteLoss, ShapeMismatch, UnknownGrapheme
from cslex.g2p import nn
from cslex.types import Lexicon

log = logging.getLogger(__name__)

PAD, BOS, EOS = "<pad>", "<s>", "</s>"
CHECKPOINT_FORMAT = "cslex-g2p"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class G2pConfig:
    enc_layers: int = 3
    dec_layers: int = 3
    heads: int = 4
    model_dim: int = 32
    ff_dim: int = 64
    max_len: int = 16
    lr: float = 0.1
    epochs: int = 200
    batch_size: int = 16
    beam: int = 4
    seed: int = 0
    pre_norm: bool = True
    clip: float = 1.0
    init_scale: float = 1.0

    def __post_init__(self):
        if self.model_dim % self.heads:
            raise ValueError(f"model_dim {self.model_dim} not divisible by heads {self.heads}")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")

    @property
    def d_k(self) -> int:
        return self.model_dim // self.heads

    @classmethod
    def from_dict(cls, d: dict) -> "G2pConfig":
        known = {f.name: f.type for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class SeqVocab:
    graphemes: tuple[str, ...]
    phonemes: tuple[str, ...]

    def __post_init__(self):
        specials = {PAD, BOS, EOS}
        if specials & set(self.graphemes) or specials & set(self.phonemes):
            raise ValueError("special symbols must not appear in content vocabularies")
        object.__setattr__(self, "_g", {g: i + 1 for i, g in enumerate(self.graphemes)})
        object.__setattr__(self, "_p", {p: i + 3 for i, p in enumerate(self.phonemes)})

    @classmethod
    def from_lexicon(cls, lex: Lexicon, extra_graphemes: Iterable[str] = "abcdefghijklmnopqrstuvwxyz"):
        graphemes = sorted(set(extra_graphemes) | {ch for w in lex.words() for ch in w})
        phonemes = sorted({ph for _, p in lex.pairs() for ph in p})
        return cls(tuple(graphemes), tuple(phonemes))

    @property
    def src_size(self) -> int:
        return len(self.graphemes) + 1  # index 0 is padding

    @property
    def tgt_size(self) -> int:
        return len(self.phonemes) + 3  # pad, bos, eos

    @property
    def tgt_symbols(self) -> tuple[str, ...]:
        return (PAD, BOS, EOS) + self.phonemes

    def encode_word(self, word: str) -> list[int]:
        out = []
        for ch in word:
            if ch not in self._g:
                raise UnknownGrapheme(ch)
            out.append(self._g[ch])
        return out

    def encode_pron(self, pron: Sequence[str]) -> list[int]:
        return [self._p[ph] for ph in pron]

    def decode_pron(self, ids: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.phonemes[i - 3] for i in ids)


def init_params(cfg: G2pConfig, vocab: SeqVocab, rng: np.random.Generator) -> dict[str, np.ndarray]:
    d, f = cfg.model_dim, cfg.ff_dim

    def w(m, n):
        return rng.normal(0.0, cfg.init_scale / np.sqrt(m), size=(m, n))

    p = {
        "src_emb": rng.normal(0.0, cfg.init_scale, size=(vocab.src_size, d)),
        "tgt_emb": rng.normal(0.0, cfg.init_scale, size=(vocab.tgt_size, d)),
    }

    def ln(prefix):
        p[prefix + "g"] = np.ones(d)
        p[prefix + "b"] = np.zeros(d)

    def attn(prefix):
        for n in ("wq", "wk", "wv", "wo"):
            p[prefix + n] = w(d, d)

    def ff(prefix):
        p[prefix + "w1"], p[prefix + "b1"] = w(d, f), np.zeros(f)
        p[prefix + "w2"], p[prefix + "b2"] = w(f, d), np.zeros(d)

    for i in range(cfg.enc_layers):
        ln(f"enc{i}.ln1."), attn(f"enc{i}.self."), ln(f"enc{i}.ln2."), ff(f"enc{i}.ff.")
    for i in range(cfg.dec_layers):
        ln(f"dec{i}.ln1."), attn(f"dec{i}.self."), ln(f"dec{i}.ln2."), attn(f"dec{i}.cross.")
        ln(f"dec{i}.ln3."), ff(f"dec{i}.ff.")
    if cfg.pre_norm:
        ln("enc.ln."), ln("dec.ln.")
    p["out.w"], p["out.b"] = w(d, vocab.tgt_size), np.zeros(vocab.tgt_size)
    return p


@dataclass
class G2pModel:
    config: G2pConfig
    vocab: SeqVocab
    params: dict[str, np.ndarray]
    loss_history: list[float] = field(default_factory=list)

    @classmethod
    def create(cls, cfg: G2pConfig, vocab: SeqVocab) -> "G2pModel":
        return cls(cfg, vocab, init_params(cfg, vocab, np.random.default_rng(cfg.seed)))

    @property
    def final_loss(self) -> float | None:
        return self.loss_history[-1] if self.loss_history else None

    # -- batching -----------------------------------------------------------

    def make_batch(self, pairs: Sequence[tuple[str, Sequence[str]]]):
        src = [self.vocab.encode_word(w) for w, _ in pairs]
        tgt = [self.vocab.encode_pron(p) for _, p in pairs]
        s_len = max(len(s) for s in src)
        t_len = max(len(t) for t in tgt) + 1
        src_ids = np.zeros((len(pairs), s_len), dtype=np.int64)
        tgt_in = np.zeros((len(pairs), t_len), dtype=np.int64)
        tgt_out = np.zeros((len(pairs), t_len), dtype=np.int64)
        for b, (s, t) in enumerate(zip(src, tgt)):
            src_ids[b, :len(s)] = s
            tgt_in[b, :len(t) + 1] = [1] + t
            tgt_out[b, :len(t) + 1] = t + [2]
        return src_ids, tgt_in, tgt_out

    # -- forward / backward -------------------------------------------------

    def _block(self, x, sub, ln_prefix, caches):
        """Residual block around ``sub``; returns the new stream."""
        p = self.params
        if self.config.pre_norm:
            h, ln_c = nn.layer_norm_forward(x, p, ln_prefix)
            s, sub_c = sub(h)
            caches.append(("pre", ln_c, sub_c))
            return x + s
        s, sub_c = sub(x)
        out, ln_c = nn.layer_norm_forward(x + s, p, ln_prefix)
        caches.append(("post", ln_c, sub_c))
        return out

    def _block_back(self, dout, cache, sub_back, grads):
        kind, ln_c, sub_c = cache
        p = self.params
        if kind == "pre":
            dh, extra = sub_back(dout, sub_c)
            return dout + nn.layer_norm_backward(dh, ln_c, p, grads), extra
        dsum = nn.layer_norm_backward(dout, ln_c, p, grads)
        dx, extra = sub_back(dsum, sub_c)
        return dsum + dx, extra

    def encode(self, src_ids):
        cfg, p = self.config, self.params
        src_mask = (src_ids != 0)[:, None, :]
        x = p["src_emb"][src_ids] + nn.sinusoidal_positions(src_ids.shape[1], cfg.model_dim)
        caches = []
        for i in range(cfg.enc_layers):
            x = self._block(x, lambda h, i=i: nn.mha_forward(h, h, p, f"enc{i}.self.", cfg.heads, src_mask),
                            f"enc{i}.ln1.", caches)
            x = self._block(x, lambda h, i=i: nn.ffn_forward(h, p, f"enc{i}.ff."), f"enc{i}.ln2.", caches)
        final = None
        if cfg.pre_norm:
            x, final = nn.layer_norm_forward(x, p, "enc.ln.")
        return x, (caches, final, src_ids)

    def decode(self, mem, src_ids, tgt_in):
        cfg, p = self.config, self.params
        src_mask = (src_ids != 0)[:, None, :]
        t = tgt_in.shape[1]
        self_mask = nn.causal_mask(t)[None]
        y = p["tgt_emb"][tgt_in] + nn.sinusoidal_positions(t, cfg.model_dim)
        caches = []
        for i in range(cfg.dec_layers):
            y = self._block(y, lambda h, i=i: nn.mha_forward(h, h, p, f"dec{i}.self.", cfg.heads, self_mask),
                            f"dec{i}.ln1.", caches)
            y = self._block(y, lambda h, i=i: nn.mha_forward(h, mem, p, f"dec{i}.cross.", cfg.heads, src_mask),
                            f"dec{i}.ln2.", caches)
            y = self._block(y, lambda h, i=i: nn.ffn_forward(h, p, f"dec{i}.ff."), f"dec{i}.ln3.", caches)
        final = None
        if cfg.pre_norm:
            y, final = nn.layer_norm_forward(y, p, "dec.ln.")
        logits = y @ p["out.w"] + p["out.b"]
        return logits, (caches, final, y, tgt_in)

    def loss_and_grads(self, batch, need_grads: bool = True):
        src_ids, tgt_in, tgt_out = batch
        p, cfg = self.params, self.config
        mem, enc_cache = self.encode(src_ids)
        logits, dec_cache = self.decode(mem, src_ids, tgt_in)
        logp = nn.log_softmax(logits)
        mask = (tgt_out != 0).astype(float)
        n_tok = mask.sum()
        picked = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
        loss = float(-(picked * mask).sum() / n_tok)
        if not need_grads:
            return loss, None

        grads = {k: np.zeros_like(v) for k, v in p.items()}
        dlogits = np.exp(logp)
        np.put_along_axis(dlogits, tgt_out[..., None],
                          np.take_along_axis(dlogits, tgt_out[..., None], axis=-1) - 1.0, axis=-1)
        dlogits *= (mask / n_tok)[..., None]

        caches, final, y, _ = dec_cache
        grads["out.w"] += np.einsum("bti,btj->ij", y, dlogits)
        grads["out.b"] += dlogits.sum(axis=(0, 1))
        dy = dlogits @ p["out.w"].T
        if final is not None:
            dy = nn.layer_norm_backward(dy, final, p, grads)
        dmem = np.zeros_like(mem)

        def attn_back(d, c):
            dq, dkv = nn.mha_backward(d, c, p, grads)
            return dq + dkv, None

        def cross_back(d, c):
            dq, dkv = nn.mha_backward(d, c, p, grads)
            return dq, dkv

        def ff_back(d, c):
            return nn.ffn_backward(d, c, p, grads), None

        for i in reversed(range(cfg.dec_layers)):
            c_self, c_cross, c_ff = caches[3 * i:3 * i + 3]
            dy, _ = self._block_back(dy, c_ff, ff_back, grads)
            dy, dm = self._block_back(dy, c_cross, cross_back, grads)
            dmem += dm
            dy, _ = self._block_back(dy, c_self, attn_back, grads)
        np.add.at(grads["tgt_emb"], tgt_in, dy)

        caches, final, _ = enc_cache
        dx = dmem
        if final is not None:
            dx = nn.layer_norm_backward(dx, final, p, grads)
        for i in reversed(range(cfg.enc_layers)):
            c_self, c_ff = caches[2 * i:2 * i + 2]
            dx, _ = self._block_back(dx, c_ff, ff_back, grads)
            dx, _ = self._block_back(dx, c_self, attn_back, grads)
        np.add.at(grads["src_emb"], src_ids, dx)
        return loss, grads

    # -- inference ----------------------------------------------------------

    def _step_logprobs(self, mem, src_ids, prefixes: np.ndarray) -> np.ndarray:
        b = prefixes.shape[0]
        logits, _ = self.decode(np.repeat(mem, b, axis=0), np.repeat(src_ids, b, axis=0), prefixes)
        return nn.log_softmax(logits[:, -1, :])

    def _allowed(self, logp: np.ndarray, step: int) -> np.ndarray:
        logp = logp.copy()
        logp[:, 0] = -np.inf
        logp[:, 1] = -np.inf
        if step == 0:
            logp[:, 2] = -np.inf
        if step >= self.config.max_len:
            logp[:, 3:] = -np.inf
        return logp

    def greedy(self, word: str) -> tuple[tuple[str, ...], float]:
        src_ids = np.array([self.vocab.encode_word(word)])
        mem, _ = self.encode(src_ids)
        seq, total = [], 0.0
        for step in range(self.config.max_len + 1):
            prefix = np.array([[1] + seq])
            logp = self._allowed(self._step_logprobs(mem, src_ids, prefix), step)[0]
            tok = int(np.argmax(logp))
            total += float(logp[tok])
            if tok == 2:
                break
            seq.append(tok)
        return self.vocab.decode_pron(seq), total

    def beam_search(self, word: str, beam: int) -> list[tuple[tuple[str, ...], float]]:
        """Beam search; returns up to ``beam`` distinct (pronunciation, log-prob), best first.

        The beam narrows by one each time a hypothesis emits EOS, so
        ``beam=1`` is exactly greedy decoding.
        """
        if beam < 1:
            raise ValueError("beam must be >= 1")
        src_ids = np.array([self.vocab.encode_word(word)])
        mem, _ = self.encode(src_ids)
        alive: list[tuple[list[int], float]] = [([], 0.0)]
        finished: list[tuple[list[int], float]] = []
        step = 0
        while alive and len(finished) < beam:
            prefixes = np.array([[1] + seq for seq, _ in alive])
            logp = self._allowed(self._step_logprobs(mem, src_ids, prefixes), step)
            total = np.array([s for _, s in alive])[:, None] + logp
            width = beam - len(finished)
            flat = total.ravel()
            order = np.argsort(-flat, kind="stable")[:width]
            nxt = []
            for k in order:
                if not np.isfinite(flat[k]):
                    break
                h, tok = divmod(int(k), total.shape[1])
                seq = alive[h][0]
                if tok == 2:
                    finished.append((seq, float(flat[k])))
                else:
                    nxt.append((seq + [tok], float(flat[k])))
            alive = nxt
            step += 1
        finished.sort(key=lambda x: -x[1])
        return [(self.vocab.decode_pron(s), lp) for s, lp in finished[:beam]]

    def predict(self, word: str, beam: int | None = None) -> list[tuple[str, ...]]:
        return [p for p, _ in self.beam_search(word, beam or self.config.beam)]

    def sequence_logprob(self, word: str, pron: Sequence[str]) -> float:
        """Total log-probability of ``pron`` followed by EOS (same masking as decoding)."""
        src_ids = np.array([self.vocab.encode_word(word)])
        mem, _ = self.encode(src_ids)
        ids = self.vocab.encode_pron(pron)
        logits, _ = self.decode(mem, src_ids, np.array([[1] + ids]))
        total = 0.0
        for step, tok in enumerate(ids + [2]):
            total += float(self._allowed(nn.log_softmax(logits[:, step, :]), step)[0, tok])
        return total

    # -- persistence --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "vocab": {"graphemes": list(self.vocab.graphemes), "phonemes": list(self.vocab.phonemes)},
            "loss_history": self.loss_history,
            "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in sorted(self.params.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> "G2pModel":
        if d.get("format") != CHECKPOINT_FORMAT or d.get("version") != CHECKPOINT_VERSION:
            raise ValueError("not a cslex g2p checkpoint (or unsupported version)")
        cfg = G2pConfig.from_dict(d["config"])
        vocab = SeqVocab(tuple(d["vocab"]["graphemes"]), tuple(d["vocab"]["phonemes"]))
        params = {k: np.array(v["data"], dtype=float).reshape(v["shape"]) for k, v in d["params"].items()}
        return cls(cfg, vocab, params, list(d.get("loss_history", [])))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "G2pModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _check_finite(model: G2pModel) -> None:
    for name, v in model.params.items():
        if not np.all(np.isfinite(v)):
            raise NonFiniteLoss(f"parameter {name} is not finite")


def _entries(lex: Lexicon) -> list[tuple[str, tuple]]:
    # canonical order: training must not depend on how the lexicon was built
    return sorted(lex.pairs())


def train(seed_lexicon: Lexicon, cfg: G2pConfig, vocab: SeqVocab | None = None) -> G2pModel:
    """Fit the model to every (word, pronunciation) pair with teacher forcing.

    Plain minibatch SGD with global-norm gradient clipping; the shuffle order
    comes from ``cfg.seed``, so the result is a pure function of the lexicon
    contents and the config.
    """
    entries = _entries(seed_lexicon)
    if not entries:
        raise EmptyLexicon("cannot train on an empty lexicon")
    vocab = vocab or SeqVocab.from_lexicon(seed_lexicon)
    model = G2pModel.create(cfg, vocab)
    rng = np.random.default_rng([cfg.seed, 1])
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(entries))
        losses, weights = [], []
        for start in range(0, len(order), cfg.batch_size):
            chunk = [entries[k] for k in order[start:start + cfg.batch_size]]
            loss, grads = model.loss_and_grads(model.make_batch(chunk))
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} in epoch {epoch}")
            sgd_step(model.params, grads, cfg.lr, cfg.clip)
            losses.append(loss)
            weights.append(len(chunk))
        model.loss_history.append(float(np.average(losses, weights=weights)))
        log.debug("epoch %d loss %.4f", epoch, model.loss_history[-1])
    _check_finite(model)
    return model


def sgd_step(params, grads, lr, clip=None):
    scale = 1.0
    if clip:
        norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        if norm > clip:
            scale = clip / norm
    for k, g in grads.items():
        params[k] -= lr * scale * g


def dataset_loss(model: G2pModel, lex: Lexicon) -> float:
    entries = _entries(lex)
    loss, _ = model.loss_and_grads(model.make_batch(entries), need_grads=False)
    return loss


def predict(model: G2pModel, word: str, beam: int | None = None) -> list[tuple[str, ...]]:
    return model.predict(word, beam)


def grad_check(model: G2pModel, batch, eps: float = 1e-5, frozen: Iterable[str] = (),
               analytic: dict | None = None) -> float:
    """Largest relative error between analytic and central-difference gradients.

    Relative error of a tensor is ``|a - n| / (|a| + |n|)`` in the 2-norm;
    the maximum is over all non-frozen parameter tensors.  ``batch`` is either
    a list of (word, pronunciation) pairs or an encoded batch.  Pass
    ``analytic`` to check a gradient other than the model's own.
    """
    if batch and isinstance(batch[0], tuple) and isinstance(batch[0][0], str):
        batch = model.make_batch(batch)
    if analytic is None:
        _, analytic = model.loss_and_grads(batch)
    frozen = set(frozen)
    worst = 0.0
    for name, value in model.params.items():
        if name in frozen:
            continue
        if analytic[name].shape != value.shape:
            raise ShapeMismatch(f"gradient for {name} has shape {analytic[name].shape}")
        num = np.zeros_like(value)
        flat, nflat = value.reshape(-1), num.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + eps
            up, _ = model.loss_and_grads(batch, need_grads=False)
            flat[k] = old - eps
            down, _ = model.loss_and_grads(batch, need_grads=False)
            flat[k] = old
            nflat[k] = (up - down) / (2 * eps)
        a = analytic[name]
        denom = np.linalg.norm(a) + np.linalg.norm(num)
        if denom > 0:
            worst = max(worst, float(np.linalg.norm(a - num) / denom))
    return worst
