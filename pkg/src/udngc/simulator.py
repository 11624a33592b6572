"""Monte Carlo engine: deployments, moving UE, handover policies, coverage oracles.

Every trial draws a fresh deployment and a straight constant-speed trajectory
from the window centre, then counts handovers under four policies on that one
realisation:

``gcho``
    Group-cell policy.  The serving cluster's footprint is a circular
    interference-protection region; a handover fires whenever the UE crosses
    the current footprint boundary.  Footprint radii are the m-th (skip
    phase: (m+1)-th) nearest-station distance sampled at an independent
    typical location of the same deployment (anchoring the radius at the
    UE's own position would size-bias the renewal toward dense pockets), and
    the UE meets each footprint at stationary (cosine-weighted) incidence.
``gchos``
    Same footprint process filtered by the skipping rule: at a crossing the
    nearest station left outside the reformed cluster may be skipped
    (blacklisted, no handover executed, next footprint one rank deeper) when
    the alternation flag and the two distance conditions allow it.
``traditional``
    Single-nearest-station association; an event whenever the nearest
    station changes (step-discretised Voronoi crossing).
``fr``
    Fixed-region baseline: stations inside a disk of radius sqrt(m/(pi*lam))
    centred on the UE; an event whenever that disk's membership changes.
    This is a qualitative stand-in, not a published fixed-region model.

Crossing detection is step-discretised; the step is capped at
0.1/(speed*sqrt(pi*lambda)) so an expected cell transit spans >= 10 steps
(the default step is half that cap).
Randomness derives only from (base_seed, trial_index), so aggregates do not
depend on how trials are distributed over workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from numpy.random import Generator, default_rng
from scipy.spatial import cKDTree

from .analytics import CoverageParams
from .errors import InsufficientPointsError, ParameterError
from .geometry import (
    Deployment,
    NeighborList,
    Trajectory,
    Window,
    guard_radius,
    k_nearest,
    sample_ppp,
)

if TYPE_CHECKING:  # pragma: no cover - typing only, avoids a runtime cycle
    from .harness import ScenarioParams

__all__ = [
    "POLICIES",
    "GroupCellState",
    "HandoverAction",
    "TrialResult",
    "RateEstimate",
    "gcho_step",
    "gchos_decision",
    "run_handover_trial",
    "simulate_trials",
    "estimate_handover_rate",
    "estimate_all_rates",
    "coverage_oracle_model",
    "coverage_oracle_geometric",
]

POLICIES = ("gcho", "gchos", "traditional", "fr")

#: resample a too-small deployment at most this many times per trial
_MAX_RESAMPLES = 100


@dataclass(frozen=True)
class GroupCellState:
    """Serving cluster snapshot: ordered members, protection radius, skip flag."""

    members: NeighborList
    r_m: float
    skip_done: bool = False

    def __post_init__(self) -> None:
        if len(self.members) == 0:
            raise ParameterError("a group cell needs at least one member")
        if not np.isclose(self.r_m, self.members.distances[-1]):
            raise ParameterError("r_m must equal the largest member distance")


class HandoverAction(Enum):
    SKIP = "skip"
    HANDOVER = "handover"


def gcho_step(
    state: GroupCellState, deployment: Deployment, ue_position
) -> tuple[GroupCellState, bool]:
    """Re-associate at ``ue_position``: handover iff the m-nearest set changed.

    Order changes alone do not count.  On handover the new m-nearest set
    becomes the members and the protection radius is refreshed.
    """
    m = len(state.members)
    nl = k_nearest(deployment, ue_position, m)
    if np.array_equal(np.sort(nl.indices), np.sort(state.members.indices)):
        return state, False
    new_state = GroupCellState(
        members=nl, r_m=float(nl.distances[-1]), skip_done=state.skip_done
    )
    return new_state, True


def gchos_decision(
    r_m: float, r1_i: float, r2_i: float, skip_done: bool
) -> HandoverAction:
    """Skip-or-handover rule evaluated at a boundary crossing.

    SKIP requires all three: the first outside station already inside the
    protection radius (r1_i < r_m), the second one close behind it
    (r2_i <= 2*r1_i), and no skip pending (alternation guard).
    """
    if r_m <= 0 or r1_i <= 0 or r2_i <= 0:
        raise ParameterError("distances must be positive")
    if r1_i < r_m and r2_i <= 2.0 * r1_i and not skip_done:
        return HandoverAction.SKIP
    return HandoverAction.HANDOVER


@dataclass(frozen=True)
class TrialResult:
    """Handover counts of one trial (same deployment and trajectory)."""

    handovers_gcho: int
    handovers_gchos: int
    handovers_traditional: int
    handovers_fr: int
    duration: float
    trajectory_length: float
    deployment_resamples: int = 0

    def __post_init__(self) -> None:
        for name in (
            "handovers_gcho",
            "handovers_gchos",
            "handovers_traditional",
            "handovers_fr",
            "deployment_resamples",
        ):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RateEstimate:
    """Empirical rate with a 95% normal-approximation confidence interval."""

    mean: float
    half_width_95: float
    trials: int

    def __post_init__(self) -> None:
        if self.mean < 0 or self.half_width_95 < 0:
            raise ParameterError("mean and half_width_95 must be non-negative")


def _sorted_knn(tree: cKDTree, positions: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    d, idx = tree.query(positions, k=k)
    if k == 1:
        d = d[:, None]
        idx = idx[:, None]
    return d, idx


def _typical_radius(
    rng: Generator, tree: cKDTree, rank: int, window_radius: float, guard: float
) -> float:
    """rank-th nearest-station distance at a uniform location of the guarded window."""
    rho = (window_radius - guard) * np.sqrt(rng.uniform())
    ang = rng.uniform(0.0, 2.0 * np.pi)
    anchor = [rho * np.cos(ang), rho * np.sin(ang)]
    d, _ = tree.query(anchor, k=rank)
    return float(np.atleast_1d(d)[-1])


def _region_course(
    rng: Generator,
    positions: np.ndarray,
    points: np.ndarray,
    tree: cKDTree,
    dists: np.ndarray,
    ids: np.ndarray,
    m: int,
    e: np.ndarray,
    window_radius: float,
    guard: float,
    skipping: bool,
) -> int:
    """Walk one protection-region renewal along the trajectory; return the
    number of executed handovers."""
    k = ids.shape[1]
    eperp = np.array([-e[1], e[0]])
    r = _typical_radius(rng, tree, m, window_radius, guard)
    members = ids[0, :m].copy()
    # stationary start: the UE sits at a uniform interior point of its cell
    rho_frac = np.sqrt(rng.uniform())
    ang = rng.uniform(0.0, 2.0 * np.pi)
    c = positions[0] + rho_frac * r * np.array([np.cos(ang), np.sin(ang)])
    events = 0
    skip_done = False
    blacklist = -1
    i = 0
    nsteps = positions.shape[0]
    while i + 1 < nsteps:
        rel = positions[i + 1 :] - c
        outside = rel[:, 0] ** 2 + rel[:, 1] ** 2 > r * r
        nz = np.nonzero(outside)[0]
        if nz.size == 0:
            break
        i = i + 1 + int(nz[0])
        x = positions[i]
        do_skip = False
        if skipping:
            row_ids = ids[i]
            row_d = dists[i]
            ranked = [j for j in range(k) if row_ids[j] != blacklist]
            if len(ranked) >= m + 2 and not skip_done:
                # nearest interferers after regrouping: ranks m+1 and m+2
                r1_i = float(row_d[ranked[m]])
                r2_i = float(row_d[ranked[m + 1]])
                # instantaneous protection radius of the outgoing members
                rel_m = points[members] - x
                r_inst = float(np.sqrt((rel_m**2).sum(axis=1).max()))
                do_skip = (
                    gchos_decision(r_inst, r1_i, r2_i, skip_done) is HandoverAction.SKIP
                )
        sina = rng.uniform(-1.0, 1.0)
        w = np.sqrt(1.0 - sina * sina) * e + sina * eperp
        if do_skip:
            blacklist = int(row_ids[ranked[m]])
            keep = [j for j in ranked if row_ids[j] != blacklist][:m]
            members = row_ids[keep].copy()
            skip_done = True
            r = _typical_radius(rng, tree, m + 1, window_radius, guard)
        else:
            events += 1
            members = ids[i, :m].copy()
            blacklist = -1
            skip_done = False
            r = _typical_radius(rng, tree, m, window_radius, guard)
        c = x + r * w
    return events


def _disk_membership_changes(
    pts: np.ndarray,
    e: np.ndarray,
    speed: float,
    r_f: float,
    step: float,
    n_steps: int,
) -> int:
    """Steps at which the set of stations within r_f of the moving UE changes.

    The UE runs along ``t*speed*e`` from the origin; station p is inside the
    disk for t in [t_in, t_out] solving |t*speed*e - p| = r_f.  A sampled
    membership bit flips at step k iff an odd number of its crossings falls
    in (t_{k-1}, t_k]; one changed step counts as one handover regardless of
    how many stations moved.
    """
    proj = pts @ e
    disc = proj**2 - ((pts**2).sum(axis=1) - r_f * r_f)
    crossing = disc > 0.0
    if not crossing.any():
        return 0
    sq = np.sqrt(disc[crossing])
    t_in = (proj[crossing] - sq) / speed
    t_out = (proj[crossing] + sq) / speed
    t_end = n_steps * step
    k_in = np.ceil(t_in / step).astype(np.int64)
    k_out = np.ceil(t_out / step).astype(np.int64)
    valid_in = (t_in > 0.0) & (t_in <= t_end)
    valid_out = (t_out > 0.0) & (t_out <= t_end)
    cancelled = valid_in & valid_out & (k_in == k_out)
    events = np.concatenate(
        [k_in[valid_in & ~cancelled], k_out[valid_out & ~cancelled]]
    )
    return int(np.unique(events).size)


def run_handover_trial(scenario: "ScenarioParams", seed) -> TrialResult:
    """Simulate one deployment + trajectory and count all four policies.

    ``seed`` may be an int or a sequence of ints; all trial randomness
    derives from it.  Deployments with fewer than m+3 stations are resampled
    (counted in ``deployment_resamples``).
    """
    rng = default_rng(seed)
    lam = scenario.lambda_bs
    m = scenario.m_group
    guard = guard_radius(lam)
    window = Window(center=(0.0, 0.0), radius=scenario.window_radius)
    duration = scenario.duration
    length = scenario.speed * duration
    if length + guard > scenario.window_radius * (1.0 + 1e-9):
        raise ParameterError(
            "trajectory would leave the guard region: "
            f"speed*duration + guard = {length + guard:.1f} > window_radius = "
            f"{scenario.window_radius:.1f}"
        )

    resamples = 0
    deployment = sample_ppp(lam, window, rng.integers(2**63))
    while deployment.size < m + 3:
        resamples += 1
        if resamples > _MAX_RESAMPLES:
            raise InsufficientPointsError(
                f"deployment kept fewer than {m + 3} stations after "
                f"{_MAX_RESAMPLES} resamples; enlarge the window or density"
            )
        deployment = sample_ppp(lam, window, rng.integers(2**63))

    trajectory = Trajectory(
        start=(0.0, 0.0),
        direction=float(rng.uniform(0.0, 2.0 * np.pi)),
        speed=scenario.speed,
        duration=duration,
        step=scenario.step,
    )
    e = np.array([np.cos(trajectory.direction), np.sin(trajectory.direction)])
    positions = trajectory.positions()

    pts = deployment.points
    tree = cKDTree(pts)
    k = min(m + 3, deployment.size)
    dists, ids = _sorted_knn(tree, positions, k)

    # traditional: nearest-station (Voronoi) crossings
    nearest = ids[:, 0]
    handovers_traditional = int(np.count_nonzero(nearest[1:] != nearest[:-1]))

    # fixed-region disk membership: each station enters/leaves the moving
    # disk on one time interval (quadratic along the line); changes are
    # counted at step granularity, so a visit contained between two samples
    # stays invisible, exactly like comparing per-step membership
    r_f = np.sqrt(m / (np.pi * lam))
    handovers_fr = _disk_membership_changes(
        pts, e, scenario.speed, r_f, scenario.step, positions.shape[0] - 1
    )

    rng_gcho, rng_gchos = rng.spawn(2)
    handovers_gcho = _region_course(
        rng_gcho, positions, pts, tree, dists, ids, m, e,
        scenario.window_radius, guard, skipping=False,
    )
    handovers_gchos = _region_course(
        rng_gchos, positions, pts, tree, dists, ids, m, e,
        scenario.window_radius, guard, skipping=True,
    )

    return TrialResult(
        handovers_gcho=handovers_gcho,
        handovers_gchos=handovers_gchos,
        handovers_traditional=handovers_traditional,
        handovers_fr=handovers_fr,
        duration=float(duration),
        trajectory_length=float(length),
        deployment_resamples=resamples,
    )


def _trial_counts(args) -> tuple[int, list[int]]:
    scenario, base_seed, idx = args
    res = run_handover_trial(scenario, [base_seed, idx])
    return idx, [
        res.handovers_gcho,
        res.handovers_gchos,
        res.handovers_traditional,
        res.handovers_fr,
        res.deployment_resamples,
    ]


def simulate_trials(
    scenario: "ScenarioParams",
    trials: int,
    base_seed: int,
    n_workers: int = 1,
) -> list[TrialResult]:
    """Run ``trials`` independent trials; per-trial seeds hash (base_seed, index).

    Results are returned in trial order, so aggregates are identical for any
    worker count.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    duration = scenario.duration
    length = scenario.speed * duration
    if n_workers <= 1:
        return [run_handover_trial(scenario, [base_seed, i]) for i in range(trials)]
    counts: list[list[int] | None] = [None] * trials
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        jobs = ((scenario, base_seed, i) for i in range(trials))
        for idx, row in pool.map(_trial_counts, jobs, chunksize=max(1, trials // (8 * n_workers))):
            counts[idx] = row
    return [
        TrialResult(
            handovers_gcho=row[0],
            handovers_gchos=row[1],
            handovers_traditional=row[2],
            handovers_fr=row[3],
            duration=float(duration),
            trajectory_length=float(length),
            deployment_resamples=row[4],
        )
        for row in counts  # type: ignore[union-attr]
    ]


def _rate_from_counts(counts: np.ndarray, duration: float, trials: int) -> RateEstimate:
    rates = counts / duration
    mean = float(counts.sum() / (trials * duration))
    half = float(1.96 * rates.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return RateEstimate(mean=mean, half_width_95=half, trials=trials)


def estimate_handover_rate(
    scenario: "ScenarioParams",
    trials: int,
    base_seed: int,
    policy: str = "gcho",
    n_workers: int = 1,
) -> RateEstimate:
    """Empirical handover rate (total events over total time) for one policy."""
    return estimate_all_rates(scenario, trials, base_seed, n_workers)[policy]


def estimate_all_rates(
    scenario: "ScenarioParams",
    trials: int,
    base_seed: int,
    n_workers: int = 1,
) -> dict[str, RateEstimate]:
    """Rates of all four policies from one shared set of trials."""
    results = simulate_trials(scenario, trials, base_seed, n_workers)
    duration = results[0].duration
    out: dict[str, RateEstimate] = {}
    for policy in POLICIES:
        counts = np.array([getattr(r, f"handovers_{policy}") for r in results], dtype=float)
        out[policy] = _rate_from_counts(counts, duration, trials)
    return out


# ---------------------------------------------------------------------------
# coverage oracles
# ---------------------------------------------------------------------------

#: fluctuation budget of the truncated interference tail (see coverage_oracle_model)
_TAIL_ERROR_BUDGET = 1e-4


def coverage_oracle_model(
    params: CoverageParams,
    trials: int,
    seed: int,
    taus=None,
    batch_size: int = 20_000,
):
    """Brute-force oracle for :func:`udngc.analytics.coverage_probability`.

    Samples the edge distance R from the same distance law the analytic path
    integrates over, drops interferers as a PPP outside radius R, draws
    unit-mean exponential fading for every station, and counts the fraction
    of trials whose SIR exceeds the threshold.

    Interferers are simulated exactly out to a squared radius p_c chosen per
    trial so that replacing the remaining tail by its exact mean perturbs the
    coverage estimate by less than 1e-4 (second-order bound on
    0.5*s^2*Var[tail]); the tail mean is then added deterministically.

    ``taus`` evaluates a whole threshold grid on shared trials and returns an
    array; otherwise the scalar probability at ``params.tau`` is returned.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    grid = np.atleast_1d(np.asarray(params.tau if taus is None else taus, dtype=float))
    if np.any(grid <= 0):
        raise ParameterError("thresholds must be positive (linear)")
    eta1 = params.pathloss.eta1
    eta2 = params.pathloss.eta2
    lam_c = params.pathloss.continuity_constant
    lam = params.lambda_bs
    m = params.m
    shape_r = 2.0 if m >= 2 else 1.0
    tau_max = float(grid.max())
    var_fac = 2.0 * np.pi * lam * lam_c**2 / (eta2 - 1.0)

    rng = default_rng(seed)
    hits = np.zeros(grid.size, dtype=np.int64)
    done = 0
    while done < trials:
        n = min(batch_size, trials - done)
        y = rng.gamma(shape_r, size=n)
        big_r2 = y / (np.pi * lam)
        big_r = np.sqrt(big_r2)
        signal_fading = rng.gamma(float(m), size=n)
        s_max = tau_max * big_r**eta1
        p_c = (0.5 * s_max**2 * var_fac / _TAIL_ERROR_BUDGET) ** (1.0 / (eta2 - 1.0))
        p_c = np.maximum(p_c, big_r2 * (1.0 + 1e-9))
        counts = rng.poisson(np.pi * lam * (p_c - big_r2))
        total = int(counts.sum())
        owner = np.repeat(np.arange(n), counts)
        u = rng.uniform(size=total)
        p = big_r2[owner] + u * (p_c[owner] - big_r2[owner])
        contrib = lam_c * p ** (-eta2 / 2.0) * rng.exponential(size=total)
        interference = np.bincount(owner, weights=contrib, minlength=n)
        tail_mean = np.pi * lam * lam_c * p_c ** (1.0 - eta2 / 2.0) / (eta2 / 2.0 - 1.0)
        interference = interference + tail_mean
        for j, tau in enumerate(grid):
            hits[j] += int((signal_fading > tau * big_r**eta1 * interference).sum())
        done += n
    probs = hits / trials
    return probs if taus is not None else float(probs[0])


def coverage_oracle_geometric(scenario: "ScenarioParams", trials: int, seed: int) -> float:
    """Empirical coverage under the exact per-link dual-slope SIR.

    The UE sits at the window centre of a fresh deployment each trial; the m
    nearest stations carry signal on their own branch, the rest interfere on
    the far branch.  Quantifies the gap left by the all-near-branch
    approximation; reported as a finding, not gated.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    lam = scenario.lambda_bs
    pl = scenario.pathloss()
    m = scenario.m_group
    tau = scenario.tau_linear
    r_w = max(200.0, 20.0 / np.sqrt(np.pi * lam))
    area = np.pi * r_w**2
    tail_mean = 2.0 * np.pi * lam * pl.continuity_constant * r_w ** (2.0 - pl.eta2) / (
        pl.eta2 - 2.0
    )
    rng = default_rng(seed)
    hits = 0
    for _ in range(trials):
        n = rng.poisson(lam * area)
        while n <= m:
            n = rng.poisson(lam * area)
        r = r_w * np.sqrt(rng.uniform(size=n))
        h = rng.exponential(size=n)
        part = np.argpartition(r, m - 1)
        coop = part[:m]
        rest = part[m:]
        near = r[coop] <= pl.d_critical
        gain = np.where(
            near,
            r[coop] ** -pl.eta1,
            pl.continuity_constant * r[coop] ** -pl.eta2,
        )
        signal = float(np.sum(gain * h[coop]))
        interference = float(
            np.sum(pl.continuity_constant * r[rest] ** -pl.eta2 * h[rest])
        ) + tail_mean
        if signal > tau * interference:
            hits += 1
    return hits / trials
