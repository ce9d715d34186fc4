"""Hadamard-test shot simulation and the nearest-prediction decision rule."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import BaseGraph
from .peaks import DELTA, PeakResult, distinguishability
from .tower import TowerParams

AMPLITUDE_SLACK = 1e-9


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Shot-count estimator of a return amplitude."""

    value: complex
    n_rep: int
    plus_counts: tuple[int, int]


def hadamard_shots(f_true: complex, n_rep: int, seed) -> AmplitudeEstimate:
    """Simulate ``n_rep`` +-1 shots per branch with means ``Re f`` and ``Im f``."""
    if n_rep < 1:
        raise ValueError("n_rep must be positive")
    if abs(f_true) > 1 + AMPLITUDE_SLACK:
        raise ValueError(f"|f| = {abs(f_true):.12g} exceeds 1")
    rng = np.random.default_rng(seed)
    probs = np.clip([(1 + f_true.real) / 2, (1 + f_true.imag) / 2], 0.0, 1.0)
    kr, ki = (int(k) for k in rng.binomial(n_rep, probs))
    value = complex(2 * kr / n_rep - 1, 2 * ki / n_rep - 1)
    return AmplitudeEstimate(value=value, n_rep=n_rep, plus_counts=(kr, ki))


def decide(predictions: Sequence[complex], estimate: complex) -> int:
    """Index of the prediction nearest ``estimate``; ties go to the lower index."""
    if len(predictions) < 2:
        raise ValueError("need at least two predictions")
    dist = np.abs(np.asarray(predictions, dtype=complex) - estimate)
    return int(np.argmin(dist))


def trial_seed(seed: int, trial: int, truth: int) -> int:
    """Per-run seed, so results do not depend on scheduling."""
    return seed ^ (2 * trial + truth)


@dataclass
class TrialRecord:
    trial: int
    truth: int
    decision: int
    f_tilde: complex

    @property
    def correct(self) -> bool:
        return self.decision == self.truth

    def to_json(self) -> str:
        return json.dumps({
            "trial": self.trial, "truth": self.truth, "decision": self.decision,
            "f_tilde_re": float(f"{self.f_tilde.real:.9g}"),
            "f_tilde_im": float(f"{self.f_tilde.imag:.9g}"),
            "correct": self.correct,
        })


def simulate_trials(predictions: Sequence[complex], n_rep: int, trials: int, seed: int = 0,
                    workers: int = 1) -> list[TrialRecord]:
    """For each trial and each true hypothesis, draw shots at that hypothesis and decide."""
    preds = [complex(f) for f in predictions]

    def run(job: tuple[int, int]) -> TrialRecord:
        trial, truth = job
        est = hadamard_shots(preds[truth], n_rep, trial_seed(seed, trial, truth))
        return TrialRecord(trial, truth, decide(preds, est.value), est.value)

    jobs = [(t, b) for t in range(trials) for b in range(len(preds))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


def exact_success_probability(predictions: Sequence[complex], n_rep: int) -> float:
    """Exact probability of a correct decision, averaged over uniform truth.

    Enumerates both binomial shot counts, so it is only meant for modest ``n_rep``.
    """
    from math import comb

    preds = np.asarray(predictions, dtype=complex)
    k = np.arange(n_rep + 1)
    grid = (2 * k / n_rep - 1)
    est = grid[:, None] + 1j * grid[None, :]
    dist = np.abs(est[..., None] - preds)
    choice = np.argmin(dist, axis=-1)
    coeff = np.array([comb(n_rep, int(j)) for j in k], dtype=float)
    total = 0.0
    for truth, f in enumerate(preds):
        pr = np.clip((1 + f.real) / 2, 0, 1)
        pi = np.clip((1 + f.imag) / 2, 0, 1)
        wr = coeff * pr**k * (1 - pr) ** (n_rep - k)
        wi = coeff * pi**k * (1 - pi) ** (n_rep - k)
        total += float(np.sum(np.outer(wr, wi) * (choice == truth)))
    return total / len(preds)


@dataclass
class TrialSummary:
    success_rate: float
    runs: int
    n_rep: int
    records: list[TrialRecord]
    peak: PeakResult
    seed: int
    nrep_mult: float

    def to_dict(self) -> dict:
        out = {
            "success_rate": self.success_rate, "runs": self.runs, "n_rep": self.n_rep,
            "budget_n_rep": self.peak.n_rep, "nrep_mult": self.nrep_mult, "seed": self.seed,
            "t_star": self.peak.t_star, "dis": self.peak.dis,
            "f_a_re": self.peak.f_a.real, "f_a_im": self.peak.f_a.imag,
            "f_b_re": self.peak.f_b.real, "f_b_im": self.peak.f_b.imag,
        }
        out.update({k: v for k, v in self.peak.to_dict().items() if k not in out})
        return out


def run_trials(ga: BaseGraph, gb: BaseGraph, p: TowerParams, delta: float = DELTA,
               trials: int = 500, seed: int = 0, nrep_mult: float = 1.0,
               workers: int = 1, **peak_kw) -> TrialSummary:
    """Peak search, then ``2 * trials`` seeded decision runs at the budget times ``nrep_mult``.

    Identical candidates have an unbounded budget; one shot per branch is used then.
    """
    peak = distinguishability(ga, gb, p, delta=delta, workers=workers, **peak_kw)
    base = peak.n_rep if peak.n_rep is not None else 1
    n_rep = max(1, int(np.ceil(base * nrep_mult)))
    records = simulate_trials([peak.f_a, peak.f_b], n_rep, trials, seed, workers)
    rate = sum(r.correct for r in records) / len(records)
    return TrialSummary(success_rate=rate, runs=len(records), n_rep=n_rep, records=records,
                        peak=peak, seed=seed, nrep_mult=nrep_mult)


def trial_success_rate(ga: BaseGraph, gb: BaseGraph, p: TowerParams, delta: float = DELTA,
                       trials: int = 500, seed: int = 0, **kw) -> float:
    return run_trials(ga, gb, p, delta, trials, seed, **kw).success_rate
