"""Transformer grapheme-to-phoneme model."""

from cslex.g2p.model import G2pConfig, G2pModel, SeqVocab, grad_check, predict, train
from cslex.g2p.nn import attention, multi_head

__all__ = ["G2pConfig", "G2pModel", "SeqVocab", "attention", "grad_check", "multi_head", "predict", "train"]
