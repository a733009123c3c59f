"""Parallel tempering: swap moves, temperature ladders, and the PT runner.

A PT run advances one chain per inverse temperature in lockstep, attempting
one swap between a uniformly chosen adjacent pair on a fixed cadence. The
efficiency statistic is the temperature-space ESJD: the mean over swap
attempts of the squared inverse-temperature gap times the acceptance
indicator.

Ladders are built iteratively: each new rung is tuned by stochastic
approximation until the estimated swap acceptance against the previous rung
hits the requested rate, using direct draws from the tempered target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rwm import OutsideSupportError, run_rwm
from .proposals import Proposal
from .streams import RngStream
from .targets import Target

_BLOCK = 256


class LadderBuildError(RuntimeError):
    """The iterative ladder construction failed to converge."""


def swap_log_ratio(beta_j: float, beta_k: float, log_f_xj: float, log_f_xk: float) -> float:
    """Log of the swap acceptance ratio between chains at ``beta_j``/``beta_k``.

    Inputs are *untempered* log densities of the two chain states. The swap is
    accepted with probability ``min(1, exp(result))``. Antisymmetric under
    exchanging the two chains, exactly: ``r(j,k) == -r(k,j)``.
    """
    for name, v in (("log_f_xj", log_f_xj), ("log_f_xk", log_f_xk)):
        if math.isnan(v) or math.isinf(v):
            raise OutsideSupportError(f"{name} must be finite, got {v}")
    return (beta_j - beta_k) * (log_f_xk - log_f_xj)


@dataclass
class TemperatureLadder:
    """Strictly decreasing inverse temperatures, ``betas[0] == 1``."""

    betas: list
    target_swap_rate: float
    builder_metadata: list = field(default_factory=list)

    def __post_init__(self):
        self.betas = [float(b) for b in self.betas]
        validate_betas(self.betas, strict=True)
        if not 0.0 < self.target_swap_rate < 1.0:
            raise ValueError(f"target swap rate must be in (0,1), got {self.target_swap_rate}")

    def __len__(self):
        return len(self.betas)

    def to_dict(self) -> dict:
        return {
            "betas": list(self.betas),
            "target_swap_rate": float(self.target_swap_rate),
            "builder_metadata": list(self.builder_metadata),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TemperatureLadder":
        return cls(
            betas=data["betas"],
            target_swap_rate=data["target_swap_rate"],
            builder_metadata=data.get("builder_metadata", []),
        )


def validate_betas(betas, strict: bool) -> None:
    if len(betas) < 2:
        raise ValueError("a ladder needs at least two inverse temperatures")
    if betas[0] != 1.0:
        raise ValueError(f"betas[0] must be exactly 1, got {betas[0]}")
    for b in betas:
        if not 0.0 < b <= 1.0:
            raise ValueError(f"inverse temperatures must lie in (0, 1], got {b}")
    pairs = zip(betas[:-1], betas[1:])
    if strict:
        if not all(hi > lo for hi, lo in pairs):
            raise ValueError("inverse temperatures must be strictly decreasing")
    elif not all(hi >= lo for hi, lo in pairs):
        raise ValueError("inverse temperatures must be non-increasing")


@dataclass
class PTStats:
    """Outcome of one PT run."""

    temperature_esjd: float
    mean_swap_acceptance: float
    swap_attempts: int
    accepted_swaps: int
    per_pair_acceptance: list
    within_acceptance: np.ndarray
    final_states: np.ndarray = field(repr=False)
    cold_chain_trace: Optional[np.ndarray] = None
    swap_log: Optional[list] = field(default=None, repr=False)


def estimate_swap_acceptance(target: Target, beta_lo: float, beta_hi: float,
                             n_samples: int, rng: RngStream) -> float:
    """Mean swap acceptance between independent draws at two temperatures.

    Draws ``x ~ pi^beta_lo`` and ``y ~ pi^beta_hi`` (direct tempered sampling)
    and averages ``min(1, exp(swap ratio))`` over the pairs. The ratio uses
    untempered log densities.
    """
    if not 0.0 < beta_lo <= beta_hi <= 1.0:
        raise ValueError(f"need 0 < beta_lo <= beta_hi <= 1, got ({beta_lo}, {beta_hi})")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    x = target.direct_tempered_sample(beta_lo, rng, size=n_samples)
    y = target.direct_tempered_sample(beta_hi, rng, size=n_samples)
    log_f_x = target.log_density_batch(x)
    log_f_y = target.log_density_batch(y)
    ratio = (beta_hi - beta_lo) * (log_f_x - log_f_y)
    return float(np.mean(np.exp(np.minimum(ratio, 0.0))))


def build_ladder(target: Target, s: float, rng: RngStream, beta_min: float = 0.01,
                 n_samples: int = 3000, tol: float = 0.005, rho_init: float = 0.5,
                 max_inner: int = 500, max_rungs: int = 1000) -> TemperatureLadder:
    """Construct a ladder whose adjacent swap acceptances all hit ``s``.

    Starting from ``beta = 1``, each new rung is proposed as
    ``beta* = beta_curr / (1 + exp(rho))`` and ``rho`` is updated by
    ``rho += n^(-1/4) (a - s)`` (``a`` the estimated swap acceptance) until
    ``|a - s| <= tol``. When a candidate falls at or below ``beta_min`` the
    ladder is closed with ``beta_min`` itself; that terminal rung is exempt
    from the acceptance tolerance.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"target swap rate must be in (0,1), got {s}")
    if not 0.0 < beta_min < 1.0:
        raise ValueError(f"beta_min must be in (0,1), got {beta_min}")

    betas = [1.0]
    metadata = []
    while True:
        beta_curr = betas[-1]
        rho = rho_init
        n = 1
        while True:
            beta_star = beta_curr / (1.0 + math.exp(rho))
            if beta_star <= beta_min:
                betas.append(beta_min)
                metadata.append({
                    "beta": beta_min,
                    "swap_acceptance": None,
                    "inner_iterations": n,
                    "terminal": True,
                })
                return TemperatureLadder(betas, s, metadata)
            a = estimate_swap_acceptance(target, beta_star, beta_curr, n_samples, rng)
            if abs(a - s) <= tol:
                betas.append(beta_star)
                metadata.append({
                    "beta": beta_star,
                    "swap_acceptance": a,
                    "inner_iterations": n,
                })
                break
            rho += n ** (-0.25) * (a - s)
            n += 1
            if n > max_inner:
                raise LadderBuildError(
                    f"no rung below beta={beta_curr:.6g} reached swap rate "
                    f"{s} +/- {tol} within {max_inner} iterations"
                )
        if len(betas) > max_rungs:
            raise LadderBuildError(f"ladder exceeded {max_rungs} rungs at swap rate {s}")


def tune_cold_scale(target: Target, rng: RngStream, target_acceptance: float = 0.234,
                    n_pilot: int = 10_000, tol: float = 0.01, max_rounds: int = 25) -> float:
    """Bisection for a Gaussian proposal scale hitting ``target_acceptance``.

    Short pilot runs on the untempered target; acceptance is monotone
    decreasing in the scale, so a bracket on it converges geometrically.
    Returns the scale whose pilot acceptance came closest to the target.
    """
    lo, hi = 1e-5, 1e3
    best_scale, best_gap = None, math.inf
    for round_idx in range(max_rounds):
        mid = math.sqrt(lo * hi)
        pilot = run_rwm(
            target,
            Proposal("gaussian", mid, target.dim),
            n_pilot,
            rng.split("pilot", round_idx),
            burn_in=500,
        )
        gap = abs(pilot.acceptance_rate - target_acceptance)
        if gap < best_gap:
            best_scale, best_gap = mid, gap
        if gap <= tol:
            break
        if pilot.acceptance_rate > target_acceptance:
            lo = mid
        else:
            hi = mid
    return float(best_scale)


def within_scales_for_ladder(cold_scale: float, betas) -> np.ndarray:
    """Per-rung proposal scales ``sigma_beta = sigma_1 / sqrt(beta)``.

    Tempered targets flatten as ``beta`` drops; ``1/sqrt(beta)`` matches how a
    Gaussian's width grows under powering, keeping within-temperature
    acceptance roughly constant down the ladder.
    """
    return cold_scale / np.sqrt(np.asarray(betas, dtype=float))


def run_pt(target: Target, ladder, within_scales, n_iters: int, rng: RngStream,
           swap_interval: int = 20, burn_in: int = 0, trace_every=None,
           inits=None, keep_swap_log: bool = False) -> PTStats:
    """Run parallel tempering for ``burn_in + n_iters`` iterations.

    Every iteration advances each chain one Metropolis step against its
    tempered density (Gaussian increments, one scale per rung). Every
    ``swap_interval``-th counted iteration additionally attempts one swap
    between a uniformly chosen adjacent pair. Statistics cover the counted
    phase; the burn-in phase runs the same dynamics uncounted.
    """
    betas = np.asarray(ladder.betas if isinstance(ladder, TemperatureLadder) else ladder, dtype=float)
    validate_betas(list(betas), strict=False)
    n_chains = len(betas)
    scales = np.asarray(within_scales, dtype=float)
    if scales.shape != (n_chains,):
        raise ValueError(f"need one within-temperature scale per rung, got shape {scales.shape}")
    if np.any(scales <= 0):
        raise ValueError("within-temperature scales must be positive")
    if swap_interval < 1:
        raise ValueError(f"swap_interval must be >= 1, got {swap_interval}")
    if n_iters < swap_interval:
        raise ValueError(f"n_iters must be >= swap_interval, got {n_iters} < {swap_interval}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")

    dim = target.dim
    if inits is None:
        states = np.tile(target.central_point(), (n_chains, 1))
    else:
        states = np.array([np.asarray(x, dtype=float) for x in inits])
        if states.shape != (n_chains, dim):
            raise ValueError(f"expected {n_chains} init points of dimension {dim}")
    log_f = target.log_density_batch(states)
    if np.any(np.isneginf(log_f)) or np.any(np.isnan(log_f)):
        raise OutsideSupportError("initial PT state outside the target support")

    n_pairs = n_chains - 1
    gen = rng.generator
    esjd_sum = 0.0
    attempts = 0
    accepted_swaps = 0
    pair_attempts = np.zeros(n_pairs, dtype=np.int64)
    pair_accepts = np.zeros(n_pairs, dtype=np.int64)
    within_accepted = np.zeros(n_chains, dtype=np.int64)
    trace = [] if trace_every else None
    swap_log = [] if keep_swap_log else None

    total = burn_in + n_iters
    # counted iterations are 1-based so a swap lands on every
    # swap_interval-th counted step regardless of burn-in length
    is_swap_step = [
        (step >= burn_in and (step - burn_in + 1) % swap_interval == 0)
        or (step < burn_in and (step + 1) % swap_interval == 0)
        for step in range(total)
    ]
    for start in range(0, total, _BLOCK):
        span = min(_BLOCK, total - start)
        eps = gen.normal(0.0, 1.0, size=(span, n_chains, dim)) * scales[None, :, None]
        unif = gen.random((span, n_chains))
        n_swaps = sum(is_swap_step[start:start + span])
        swap_pairs = gen.integers(0, n_pairs, size=n_swaps) if n_pairs > 0 else np.zeros(n_swaps, int)
        swap_unif = gen.random(n_swaps)
        swap_idx = 0
        for t in range(span):
            step = start + t
            proposed = states + eps[t]
            log_f_prop = target.log_density_batch(proposed)
            log_alpha = betas * (log_f_prop - log_f)
            acc = unif[t] < np.exp(np.minimum(log_alpha, 0.0))
            states = np.where(acc[:, None], proposed, states)
            log_f = np.where(acc, log_f_prop, log_f)
            counted = step >= burn_in
            if counted:
                within_accepted += acc
            if is_swap_step[step]:
                p = int(swap_pairs[swap_idx])
                u = swap_unif[swap_idx]
                swap_idx += 1
                ratio = swap_log_ratio(betas[p], betas[p + 1], float(log_f[p]), float(log_f[p + 1]))
                swap_ok = u < math.exp(min(ratio, 0.0))
                if swap_ok:
                    states[[p, p + 1]] = states[[p + 1, p]]
                    log_f[[p, p + 1]] = log_f[[p + 1, p]]
                if counted:
                    delta = betas[p] - betas[p + 1]
                    attempts += 1
                    pair_attempts[p] += 1
                    if swap_ok:
                        esjd_sum += delta * delta
                        accepted_swaps += 1
                        pair_accepts[p] += 1
                    if swap_log is not None:
                        swap_log.append((p, float(delta), bool(swap_ok)))
            if counted and trace is not None:
                c = step - burn_in + 1
                if c % trace_every == 0:
                    trace.append(float(states[0, 0]))

    per_pair = [
        float(pair_accepts[p] / pair_attempts[p]) if pair_attempts[p] else None
        for p in range(n_pairs)
    ]
    return PTStats(
        temperature_esjd=float(esjd_sum / attempts) if attempts else 0.0,
        mean_swap_acceptance=float(accepted_swaps / attempts) if attempts else 0.0,
        swap_attempts=int(attempts),
        accepted_swaps=int(accepted_swaps),
        per_pair_acceptance=per_pair,
        within_acceptance=within_accepted / n_iters,
        final_states=states,
        cold_chain_trace=np.array(trace) if trace is not None else None,
        swap_log=swap_log,
    )
