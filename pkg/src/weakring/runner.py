"""Experiment pipeline: setup, sampling, diagnostics, attack, report."""

from __future__ import annotations

import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import gmpy2
import numpy as np

from . import __version__
from .attack import (SMALL_ERROR, SMALL_SET, Verdict, attack_ringlwe, attack_small_error,
                     attack_small_set, build_error_set, histogram_mod_q)
from .attack import backend as attack_backend
from .embedding import (build_embedding, decimal_string, ring_multiply, spectral_stats, tau,
                        transport_to_residue)
from .errors import IoFailure, NotPrime, SchemaViolation, WeakringError
from .numtheory import DEFAULT_FACTOR_BUDGET, PrimeModulus
from .poly import IntPolynomial
from .ringcore import RootInfo, poly_eval_mod, small_order_roots
from .sampling import (GaussianSpec, _atomic_write, derive_seed, error_norm_stats,
                       gen_polylwe_samples, gen_ringlwe_samples, lattice_gaussian_coordinates,
                       sample_coeff_gaussian, sample_uniform_poly, stream, uniform_samples_like)

VARIANTS = ("polylwe", "ringlwe")
CONTROLS = ("none", "uniform")
ATTACKS = ("auto", SMALL_ERROR, SMALL_SET)

# stream tags private to the runner
_TRIAL_SECRET, _DIAG = 10, 11


@dataclass(frozen=True)
class Budgets:
    factoring: int = DEFAULT_FACTOR_BUDGET
    set_size_cap: int = 1 << 26
    max_q: int = 1 << 40


@dataclass(frozen=True)
class ExperimentConfig:
    f: IntPolynomial
    q: int
    w: str                       # kept as the decimal string it was given in
    variant: str
    ell: int
    trials: int
    seed: int
    precision_bits: int = 300
    workers: int = 1
    budgets: Budgets = Budgets()
    control: str = "none"
    attack: str = "auto"
    diagnostic_draws: int = 16
    cache_dir: Optional[str] = None

    @property
    def n(self) -> int:
        return self.f.degree

    @property
    def width(self) -> float:
        return float(self.w)

    def to_json(self) -> dict:
        d = {
            "f": self.f.to_json(), "q": str(self.q), "w": self.w, "variant": self.variant,
            "ell": str(self.ell), "trials": str(self.trials), "seed": str(self.seed),
            "precision_bits": str(self.precision_bits), "workers": str(self.workers),
            "budgets": {"factoring": str(self.budgets.factoring),
                        "set_size_cap": str(self.budgets.set_size_cap),
                        "max_q": str(self.budgets.max_q)},
            "control": self.control, "attack": self.attack,
            "diagnostic_draws": str(self.diagnostic_draws),
        }
        if self.cache_dir is not None:
            d["cache_dir"] = self.cache_dir
        return d

    @classmethod
    def from_json(cls, doc) -> "ExperimentConfig":
        return _parse_config(doc)


_REQUIRED = ("f", "q", "w", "variant", "ell", "trials", "seed")
_OPTIONAL = ("precision_bits", "workers", "budgets", "control", "attack", "diagnostic_draws",
             "cache_dir")
_BUDGET_KEYS = ("factoring", "set_size_cap", "max_q")


def _int_field(doc, key, path, minimum=None):
    v = doc[key]
    if not isinstance(v, str):
        raise SchemaViolation(f"{path}.{key}", "integers must be given as decimal strings")
    try:
        out = int(v, 10)
    except ValueError:
        raise SchemaViolation(f"{path}.{key}", f"not a decimal integer: {v!r}") from None
    if minimum is not None and out < minimum:
        raise SchemaViolation(f"{path}.{key}", f"must be >= {minimum}")
    return out


def _parse_config(doc) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "config must be a JSON object")
    unknown = set(doc) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise SchemaViolation(f"$.{sorted(unknown)[0]}", "unknown key")
    for k in _REQUIRED:
        if k not in doc:
            raise SchemaViolation(f"$.{k}", "missing required key")
    try:
        f = IntPolynomial.from_json(doc["f"])
    except (ValueError, TypeError, KeyError) as exc:
        raise SchemaViolation("$.f", str(exc)) from None
    if f.degree < 1 or not f.is_monic:
        raise SchemaViolation("$.f", "must be monic of degree >= 1")
    q = _int_field(doc, "q", "$", 2)
    try:
        PrimeModulus.of(q)
    except NotPrime:
        raise SchemaViolation("$.q", f"{q} is not prime") from None
    w = doc["w"]
    if not isinstance(w, str):
        raise SchemaViolation("$.w", "width must be a decimal string")
    try:
        wv = float(w)
    except ValueError:
        raise SchemaViolation("$.w", f"not a number: {w!r}") from None
    if not (wv >= 0 and math.isfinite(wv)):
        raise SchemaViolation("$.w", "width must be finite and non-negative")
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise SchemaViolation("$.variant", f"must be one of {VARIANTS}")
    ell = _int_field(doc, "ell", "$", 1)
    trials = _int_field(doc, "trials", "$", 1)
    seed = _int_field(doc, "seed", "$", 0)
    if seed >= 1 << 64:
        raise SchemaViolation("$.seed", "seed must fit in 64 bits")
    kw = {}
    if "precision_bits" in doc:
        kw["precision_bits"] = _int_field(doc, "precision_bits", "$", 64)
    if "workers" in doc:
        kw["workers"] = _int_field(doc, "workers", "$", 1)
    if "diagnostic_draws" in doc:
        kw["diagnostic_draws"] = _int_field(doc, "diagnostic_draws", "$", 0)
    if "budgets" in doc:
        b = doc["budgets"]
        if not isinstance(b, dict):
            raise SchemaViolation("$.budgets", "must be an object")
        extra = set(b) - set(_BUDGET_KEYS)
        if extra:
            raise SchemaViolation(f"$.budgets.{sorted(extra)[0]}", "unknown key")
        kw["budgets"] = Budgets(**{k: _int_field(b, k, "$.budgets", 1) for k in b})
    for key, allowed in (("control", CONTROLS), ("attack", ATTACKS)):
        if key in doc:
            if doc[key] not in allowed:
                raise SchemaViolation(f"$.{key}", f"must be one of {allowed}")
            kw[key] = doc[key]
    if "cache_dir" in doc:
        if not isinstance(doc["cache_dir"], str):
            raise SchemaViolation("$.cache_dir", "must be a string")
        kw["cache_dir"] = doc["cache_dir"]
    if variant == "ringlwe" and poly_eval_mod(f, 1, q) != 0:
        raise SchemaViolation("$.f", "ringlwe needs the root condition f(1) = 0 mod q")
    return ExperimentConfig(f, q, w, variant, ell, trials, seed, **kw)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None
    return _parse_config(doc)


def save_config(config: ExperimentConfig, path) -> None:
    _atomic_write(Path(path), json.dumps(config.to_json(), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# report


@dataclass
class TrialResult:
    index: int
    seed: int
    planted_residue: Optional[int] = None
    outcome: Optional[dict] = None
    correct: bool = False
    histograms: dict = field(default_factory=dict)
    sanity_ok: Optional[bool] = None
    error: Optional[str] = None
    timing: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"index": self.index, "seed": str(self.seed),
                "planted_residue": None if self.planted_residue is None
                else str(self.planted_residue),
                "outcome": self.outcome, "correct": self.correct,
                "histograms": self.histograms, "sanity_ok": self.sanity_ok,
                "error": self.error, "timing": self.timing}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list
    success_count: int
    tau: object
    alpha: Optional[int]
    method: Optional[str]
    setup: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    environment: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"config": self.config.to_json(),
                "success_count": self.success_count,
                "trial_count": len(self.trials),
                "tau": decimal_string(self.tau),
                "feasibility_quantity": decimal_string(self.tau),
                "alpha": None if self.alpha is None else str(self.alpha),
                "method": self.method,
                "setup": self.setup,
                "trials": [t.to_json() for t in self.trials],
                "timing": self.timing,
                "environment": self.environment}


def save_report(report: ExperimentReport, path) -> None:
    _atomic_write(Path(path), json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")


def strip_volatile(doc):
    """Copy of a report document without timing and environment fields."""
    if isinstance(doc, dict):
        return {k: strip_volatile(v) for k, v in doc.items()
                if k not in ("timing", "environment", "elapsed_seconds")}
    if isinstance(doc, list):
        return [strip_volatile(v) for v in doc]
    return doc


def environment_fingerprint() -> dict:
    return {"python": sys.version.split()[0], "platform": platform.platform(),
            "numpy": np.__version__, "gmpy2": gmpy2.version(), "weakring": __version__,
            "scan_backend": attack_backend.BACKEND, "cpus": os.cpu_count()}


# --------------------------------------------------------------------------
# pipeline


def _choose_attack(config: ExperimentConfig, sigma: float):
    """(alpha RootInfo, method) for Poly-LWE, preferring +-1 with the small-error test."""
    f, q = config.f, config.q
    if config.attack in ("auto", SMALL_ERROR):
        for a in (1, q - 1):
            if poly_eval_mod(f, a, q) == 0:
                return RootInfo(a, 1 if a == 1 else 2, q), SMALL_ERROR
        if config.attack == SMALL_ERROR:
            roots = small_order_roots(f, q)
            if not roots:
                raise WeakringError("f has no root of small order mod q")
            return roots[0], SMALL_ERROR
    roots = [r for r in small_order_roots(f, q)]
    if not roots:
        raise WeakringError("f has no root of small order mod q")
    return roots[0], SMALL_SET


def _sanity_polylwe(config, alpha, rng) -> bool:
    from .embedding import _quotient_ring
    q, n = config.q, config.n
    ring = _quotient_ring(config.f, q)
    u, v = sample_uniform_poly(q, n, rng), sample_uniform_poly(q, n, rng)
    ev = lambda c: poly_eval_mod(IntPolynomial(tuple(c)), alpha, q)  # noqa: E731
    return ev(ring.mul(u, v)) == ev(u) * ev(v) % q


def _sanity_ringlwe(emb, q, rng) -> bool:
    n = emb.n
    u = emb.embed(sample_uniform_poly(q, n, rng))
    v = emb.embed(sample_uniform_poly(q, n, rng))
    uv = ring_multiply(u, v, emb, q)
    t = lambda x: transport_to_residue(x, emb, 1, q)  # noqa: E731
    return t(uv) == t(u) * t(v) % q


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Run ``config.trials`` seeded trials and count unique correct guesses."""
    workers = workers or config.workers
    q, n = config.q, config.n
    t_setup = time.perf_counter()
    setup = {}
    emb = None
    alpha = method = None
    error_set = None
    if config.variant == "ringlwe":
        emb = build_embedding(config.f, config.precision_bits, config.cache_dir)
        det_scale = emb.sigma_scale()
        spec = GaussianSpec.from_width(config.width, det_scale)
        setup["det_scale"] = decimal_string(det_scale)
        setup["sigma"] = repr(spec.sigma)
        setup["sigma_prime"] = repr(spec.sigma_prime)
        try:
            rep = spectral_stats(emb, config.width, q)
            setup["spectral"] = rep.to_json()
        except WeakringError as exc:
            setup["spectral"] = {"error": str(exc)}
        setup["error_norm_smoke"] = error_norm_stats(5, emb, spec,
                                                     derive_seed(config.seed, _DIAG)).to_json()
        alpha, method = 1, SMALL_ERROR
    else:
        spec = GaussianSpec.from_width(config.width)
        setup["sigma"] = repr(spec.sigma)
        root, method = _choose_attack(config, spec.sigma)
        alpha = root.root
        if method == SMALL_SET:
            error_set = build_error_set(root, spec.sigma, n, q, config.budgets.set_size_cap)
            setup["error_set_size"] = error_set.cardinality
        setup["alpha_order"] = root.order
    setup_seconds = time.perf_counter() - t_setup

    trials = []
    for t in range(config.trials):
        trials.append(_run_trial(config, t, spec, emb, alpha, method, error_set, workers))
    success = sum(1 for tr in trials if tr.correct)
    return ExperimentReport(config, trials, success, tau(n, q, config.width), alpha, method,
                            setup, {"setup_seconds": setup_seconds,
                                    "trial_seconds": [tr.timing.get("total_seconds")
                                                      for tr in trials]},
                            environment_fingerprint())


def _run_trial(config, t, spec, emb, alpha, method, error_set, workers) -> TrialResult:
    q, n = config.q, config.n
    seed = derive_seed(config.seed, t)
    res = TrialResult(t, seed)
    t0 = time.perf_counter()
    try:
        secret_rng = stream(seed, _TRIAL_SECRET)
        coords = sample_uniform_poly(q, n, secret_rng)
        diag = stream(seed, _DIAG)
        if config.variant == "ringlwe":
            secret_vec = emb.embed(coords)
            samples = gen_ringlwe_samples(emb, q, spec, secret_vec, config.ell, seed)
            res.planted_residue = transport_to_residue(secret_vec, emb, 1, q)
            res.sanity_ok = _sanity_ringlwe(emb, q, diag)
            errs = [sum(lattice_gaussian_coordinates(emb, spec.sigma_prime, diag)) % q
                    for _ in range(config.diagnostic_draws)]
        else:
            samples = gen_polylwe_samples(config.f, q, spec, coords, config.ell, seed)
            res.planted_residue = poly_eval_mod(IntPolynomial(tuple(coords)), alpha, q)
            res.sanity_ok = _sanity_polylwe(config, alpha, diag)
            ev = IntPolynomial
            errs = [poly_eval_mod(ev(tuple(sample_coeff_gaussian(spec, n, diag))), alpha, q)
                    for _ in range(config.diagnostic_draws)]
        if config.control == "uniform":
            samples = uniform_samples_like(samples, derive_seed(seed, 1), emb)
        res.timing["sampling_seconds"] = time.perf_counter() - t0

        t1 = time.perf_counter()
        if config.variant == "ringlwe":
            out = attack_ringlwe(samples, emb, workers=workers, max_q=config.budgets.max_q)
        elif method == SMALL_SET:
            out = attack_small_set(samples, RootInfo(alpha, error_set.alpha.order, q), error_set,
                                   workers=workers, max_q=config.budgets.max_q)
        else:
            out = attack_small_error(samples, RootInfo(alpha, None, q), workers=workers,
                                     max_q=config.budgets.max_q)
        res.timing["attack_seconds"] = time.perf_counter() - t1

        from .attack import evaluate_samples
        a_vals, b_vals = evaluate_samples(samples, alpha, emb)
        s = res.planted_residue
        res.histograms = {
            "errors": histogram_mod_q(errs, q).to_json(),
            "a_values": histogram_mod_q(a_vals, q).to_json(),
            "residuals_at_planted": histogram_mod_q(
                [(b - s * a) % q for a, b in zip(a_vals, b_vals)], q).to_json(),
        }
        res.outcome = out.to_json()
        res.correct = out.verdict is Verdict.GUESS and out.guess == s
    except WeakringError as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    res.timing["total_seconds"] = time.perf_counter() - t0
    return res


def generate_samples(config: ExperimentConfig, trial: int = 0):
    """The sample set trial ``trial`` of ``config`` would attack, plus its planted residue."""
    q, n = config.q, config.n
    seed = derive_seed(config.seed, trial)
    coords = sample_uniform_poly(q, n, stream(seed, _TRIAL_SECRET))
    if config.variant == "ringlwe":
        emb = build_embedding(config.f, config.precision_bits, config.cache_dir)
        spec = GaussianSpec.from_width(config.width, emb.sigma_scale())
        secret_vec = emb.embed(coords)
        samples = gen_ringlwe_samples(emb, q, spec, secret_vec, config.ell, seed)
        return samples, transport_to_residue(secret_vec, emb, 1, q), 1
    spec = GaussianSpec.from_width(config.width)
    root, _ = _choose_attack(config, spec.sigma)
    samples = gen_polylwe_samples(config.f, q, spec, coords, config.ell, seed)
    return samples, poly_eval_mod(IntPolynomial(tuple(coords)), root.root, q), root.root


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **kw)
