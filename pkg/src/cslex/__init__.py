"""Pronunciation lexicon learning for foreign words in code-switching ASR.

Candidate pronunciations come from n-best phonetic decodes, are selected by
average posterior estimation (APE) or phoneme confusion networks (PCN), and
seed a small transformer G2P.  A synthetic noisy-channel corpus with a hidden
ground-truth lexicon makes every stage checkable.
"""

__version__ = "0.1.0"
