"""Random-walk Metropolis kernel, chain runner, and per-run statistics.

The runner advances many independent runs in lockstep against one target,
with every run owning its own increment proposal and random stream. Batch
rows never interact and all row-wise reductions are bit-stable, so a run's
output is identical whether it executes alone, inside a batch, or on any
worker. ESJD is accumulated as the mean squared Euclidean jump over all
attempted transitions after burn-in (rejections contribute zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .proposals import Proposal
from .streams import RngStream
from .targets import Target

# Randomness is pre-generated per run in fixed-size blocks; changing this
# constant changes the stream consumption order and therefore the output.
_BLOCK = 256


class OutsideSupportError(ValueError):
    """A chain was asked to start from (or sit at) a zero-density point."""


def accept_probability(log_pi_current: float, log_pi_proposed: float) -> float:
    """Metropolis acceptance probability ``min(1, pi(y)/pi(x))`` in log space.

    The current state must have positive density; a ``-inf`` (or NaN) current
    value is a programming error and raises loudly. A ``-inf`` proposal gives
    probability zero.
    """
    if math.isnan(log_pi_current) or log_pi_current == -math.inf:
        raise OutsideSupportError(f"current state has log density {log_pi_current}")
    if math.isnan(log_pi_proposed):
        raise ValueError("proposed log density is NaN")
    return math.exp(min(log_pi_proposed - log_pi_current, 0.0))


@dataclass
class StepResult:
    next_state: np.ndarray
    accepted: bool
    sq_jump: float


@dataclass
class ChainStats:
    """Outcome of one run: ESJD, acceptance rate, and optional traces."""

    esjd: float
    acceptance_rate: float
    n_iters: int
    accepted_count: int
    final_state: np.ndarray
    trace_first_component: Optional[np.ndarray] = None
    trajectory: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "esjd": float(self.esjd),
            "acceptance_rate": float(self.acceptance_rate),
            "n_iters": int(self.n_iters),
            "accepted_count": int(self.accepted_count),
            "final_state": [float(v) for v in self.final_state],
        }
        if self.trace_first_component is not None:
            out["trace_first_component"] = [float(v) for v in self.trace_first_component]
        return out


def rwm_step(state: np.ndarray, target: Target, proposal: Proposal, rng: RngStream) -> StepResult:
    """One Metropolis transition from ``state``; rejection returns it bitwise."""
    state = np.asarray(state, dtype=float)
    log_pi_x = target.log_density(state)
    if log_pi_x == -math.inf or math.isnan(log_pi_x):
        raise OutsideSupportError("current state is outside the target support")
    eps = proposal.sample_increment(rng)
    proposed = state + eps
    alpha = accept_probability(log_pi_x, target.log_density(proposed))
    if rng.generator.random() < alpha:
        diff = proposed - state
        return StepResult(proposed, True, float(np.sum(diff * diff)))
    return StepResult(state.copy(), False, 0.0)


def run_rwm(target: Target, proposal: Proposal, n_iters: int, rng: RngStream,
            init=None, burn_in: int = 1000, trace_every=None,
            keep_trajectory: bool = False) -> ChainStats:
    """Run one chain for ``burn_in + n_iters`` transitions.

    Statistics cover the final ``n_iters`` attempted transitions only. The
    chain starts at ``init`` (default: the target's central point), which must
    lie in the support. ``trace_every`` records the first component every that
    many counted transitions; ``keep_trajectory`` stores every post-burn-in
    state for offline recomputation at test scale.
    """
    return run_rwm_batch(target, [proposal], [rng], n_iters, inits=None if init is None else [init],
                         burn_in=burn_in, trace_every=trace_every,
                         keep_trajectory=keep_trajectory)[0]


def run_rwm_batch(target: Target, proposals, rngs, n_iters: int, inits=None,
                  burn_in: int = 1000, trace_every=None,
                  keep_trajectory: bool = False) -> list:
    """Advance many independent runs in lockstep; one ChainStats per run."""
    if n_iters < 2:
        raise ValueError(f"n_iters must be >= 2, got {n_iters}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    if len(proposals) != len(rngs):
        raise ValueError("need exactly one rng per proposal")
    n_runs = len(proposals)
    dim = target.dim
    for prop in proposals:
        if prop.dim != dim:
            raise ValueError(f"proposal dimension {prop.dim} != target dimension {dim}")

    if inits is None:
        inits = [target.central_point()] * n_runs
    states = np.array([np.asarray(x, dtype=float) for x in inits])
    if states.shape != (n_runs, dim):
        raise ValueError(f"expected {n_runs} init points of dimension {dim}")
    log_pi = target.log_density_batch(states)
    if np.any(np.isneginf(log_pi)) or np.any(np.isnan(log_pi)):
        raise OutsideSupportError("initial state outside the target support")

    esjd_sum = np.zeros(n_runs)
    accepted = np.zeros(n_runs, dtype=np.int64)
    traces = [] if trace_every else None
    # trajectory holds the state entering the counted section plus every
    # counted state, so offline ESJD recomputation sees all n_iters jumps
    trajectory = None
    if keep_trajectory:
        trajectory = [states.copy()] if burn_in == 0 else []

    total = burn_in + n_iters
    for start in range(0, total, _BLOCK):
        span = min(_BLOCK, total - start)
        # per-run randomness from per-run streams, stacked time-major
        eps = np.stack([p.sample_increment_block(r, span) for p, r in zip(proposals, rngs)], axis=1)
        unif = np.stack([r.generator.random(span) for r in rngs], axis=1)
        for t in range(span):
            step = start + t
            proposed = states + eps[t]
            log_pi_prop = target.log_density_batch(proposed)
            alpha = np.exp(np.minimum(log_pi_prop - log_pi, 0.0))
            acc = unif[t] < alpha
            if step >= burn_in:
                diff = proposed - states
                sq = np.sum(diff * diff, axis=1)
                esjd_sum += np.where(acc, sq, 0.0)
                accepted += acc
            states = np.where(acc[:, None], proposed, states)
            log_pi = np.where(acc, log_pi_prop, log_pi)
            if step >= burn_in:
                counted = step - burn_in + 1
                if traces is not None and counted % trace_every == 0:
                    traces.append(states[:, 0].copy())
            if trajectory is not None and step >= burn_in - 1:
                trajectory.append(states.copy())

    trace_arr = np.array(traces) if traces is not None else None
    traj_arr = np.array(trajectory) if trajectory is not None else None
    stats = []
    for i in range(n_runs):
        stats.append(ChainStats(
            esjd=float(esjd_sum[i] / n_iters),
            acceptance_rate=float(accepted[i] / n_iters),
            n_iters=int(n_iters),
            accepted_count=int(accepted[i]),
            final_state=states[i].copy(),
            trace_first_component=trace_arr[:, i].copy() if trace_arr is not None else None,
            trajectory=traj_arr[:, i, :].copy() if traj_arr is not None else None,
        ))
    return stats
