"""Guess-loop attacks: small error-value set, small error, and Ring-LWE transport."""

from .backend import BACKEND
from .core import (CHUNK, MAX_ATTACK_Q, SMALL_ERROR, SMALL_SET, AttackOutcome, ErrorValueSet,
                   HistogramModQ, Verdict, attack_ringlwe, attack_small_error, attack_small_set,
                   brute_force_error_set, build_error_set, continue_attack, evaluate_samples,
                   histogram_mod_q, interval_cutoffs, scan)

__all__ = [
    "BACKEND", "CHUNK", "MAX_ATTACK_Q", "SMALL_ERROR", "SMALL_SET", "AttackOutcome",
    "ErrorValueSet", "HistogramModQ", "Verdict", "attack_ringlwe", "attack_small_error",
    "attack_small_set", "brute_force_error_set", "build_error_set", "continue_attack",
    "evaluate_samples", "histogram_mod_q", "interval_cutoffs", "scan",
]
