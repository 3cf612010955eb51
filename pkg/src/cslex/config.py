"""Run configuration: dataclasses plus an INI loader with ``section.key=value`` overrides.

One section per dataclass::

    [corpus]    n_words, volume_law, p_sub, p_ins, p_del, noise_seed, seed, heldout_per_word
    [decode]    n, lam
    [selection] method, n_out, keep, n_pcn, eps_weight, sub_cost, ins_cost, del_cost
    [g2p]       any G2pConfig field
    [ia]        enabled, k_min, threshold
    [score]     buckets
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields, replace
from typing import Iterable

from cslex.g2p import G2pConfig
from cslex.ia import IaConfig
from cslex.pcn import DEFAULT_EPS_WEIGHT, AlignmentCosts
from cslex.selection import SelectionConfig, SelectionMethod
from cslex.simulate import NoiseModel, VolumeLaw


@dataclass(frozen=True)
class CorpusConfig:
    n_words: int = 500
    volume_law: str = "zipf:s=1.1,max=200"
    p_sub: float = 0.15
    p_ins: float = 0.05
    p_del: float = 0.05
    noise_seed: int = 0
    seed: int = 0
    heldout_per_word: int = 5

    def __post_init__(self):
        VolumeLaw.parse(self.volume_law)
        self.noise()

    def noise(self) -> NoiseModel:
        return NoiseModel(self.p_sub, self.p_ins, self.p_del, rng_seed=self.noise_seed)


@dataclass(frozen=True)
class DecodeConfig:
    n: int = 10
    lam: float = 1.0

    def __post_init__(self):
        if self.n < 1 or not self.lam > 0:
            raise ValueError("decode n must be >= 1 and lam > 0")


@dataclass(frozen=True)
class SelectionSection:
    method: str = "APE"
    n_out: int = 4
    keep: int = 20
    n_pcn: int = 20
    eps_weight: float = DEFAULT_EPS_WEIGHT
    sub_cost: float = 1.0
    ins_cost: float = 1.0
    del_cost: float = 1.0

    def build(self) -> SelectionConfig:
        return SelectionConfig(SelectionMethod.parse(self.method), self.n_out, self.keep, self.n_pcn,
                               self.eps_weight, AlignmentCosts(0.0, self.sub_cost, self.ins_cost, self.del_cost))


@dataclass(frozen=True)
class IaSection:
    enabled: bool = False
    k_min: int = 10
    threshold: int = 20


@dataclass(frozen=True)
class ScoreSection:
    buckets: str = "1,10,20"


@dataclass(frozen=True)
class PipelineConfig:
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    selection: SelectionSection = field(default_factory=SelectionSection)
    g2p: G2pConfig = field(default_factory=G2pConfig)
    ia: IaSection = field(default_factory=IaSection)
    score: ScoreSection = field(default_factory=ScoreSection)

    def __post_init__(self):
        self.selection.build()
        self.ia_config()

    def selection_config(self) -> SelectionConfig:
        return self.selection.build()

    def ia_config(self) -> IaConfig:
        sel = self.selection.build()
        return IaConfig(self.ia.k_min, self.ia.threshold, sel.method, sel.n_out)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for section, values in self.to_dict().items():
            cp[section] = {k: str(v) for k, v in values.items()}
        lines = []
        for name in cp.sections():
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {v}" for k, v in cp[name].items())
            lines.append("")
        return "\n".join(lines)


def _coerce(kind, text: str):
    kind = kind if isinstance(kind, str) else kind.__name__
    if kind == "bool":
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text.strip()


def _apply(section_obj, values: dict, section: str):
    types = {f.name: f.type for f in fields(section_obj)}
    changes = {}
    for key, raw in values.items():
        if key not in types:
            raise KeyError(f"unknown config key {section}.{key}")
        changes[key] = _coerce(types[key], raw)
    return replace(section_obj, **changes)


def load_config(path: str | None = None, overrides: Iterable[str] = ()) -> PipelineConfig:
    """Defaults, then the INI file at ``path``, then ``section.key=value`` overrides."""
    raw: dict[str, dict[str, str]] = {}
    if path:
        cp = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
        for name in cp.sections():
            raw.setdefault(name, {}).update(cp[name])
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ValueError(f"override must look like section.key=value: {item!r}")
        raw.setdefault(section, {})[name] = value
    cfg = PipelineConfig()
    changes = {}
    for section, values in raw.items():
        if section not in {f.name for f in fields(cfg)}:
            raise KeyError(f"unknown config section [{section}]")
        changes[section] = _apply(getattr(cfg, section), values, section)
    return replace(cfg, **changes)
