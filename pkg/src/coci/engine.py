"""The adaptive confidence-box sampler and its uniform-sampling ablation.

One run proceeds in rounds. After pulling every arm tau times (tau = 1 for
mean estimation, 2 for variance estimation), each round

1. recomputes which arms are *candidates* -- arms whose component of the
   leading optimal decision varies over the current confidence box;
2. stops and returns the decision at the box's lower corner when no
   candidate remains (the decision is then constant over the whole box);
3. otherwise pulls the candidate arm with the largest confidence radius
   (the uniform ablation instead pulls the largest-radius arm overall,
   which degenerates to round-robin), updates that arm's estimate, and
   recomputes every radius (they grow with the round index).

Runs are deterministic given (instance, delta, strategy, seed): each arm
draws from a private sub-stream keyed by (seed, arm index), so an arm's
j-th sample does not depend on when it is pulled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .condition import ConditionStrategy, candidate_on_bounds, default_strategy
from .core import ConfidenceBox, ProblemInstance
from .errors import UsageError
from .estimators import estimate_from_sums
from .hardness import sample_complexity_bound
from .sim import BufferedArm, arm_stream

_DEFAULT_MAX_ROUNDS = 10**6


@dataclass(frozen=True)
class CociState:
    """One traced round: the sampler state after ``t`` total samples.

    ``candidates`` is the candidate set computed *from* this state (the set
    that decides whether round t+1 pulls or stops); ``pulled_arm`` and
    ``observation`` describe the pull that produced this state (None for the
    initialization snapshot).
    """

    t: int
    pulls: tuple[int, ...]
    estimates: tuple[float, ...]
    radii: tuple[float, ...]
    box: ConfidenceBox
    candidates: tuple[int, ...]
    pulled_arm: Optional[int]
    observation: Optional[float]


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run.

    ``rounds`` equals the total number of samples drawn. ``xi_held`` records
    whether every estimate stayed within its confidence radius of the truth
    in every round (audited against the instance's true parameters).
    ``lemma_violations`` counts pulls of an arm whose previous-round radius
    had already shrunk below half its flip radius (only audited when
    ``lambda_lower`` is supplied). ``bound_value`` is the round bound implied
    by the supplied hardness, when any.
    """

    output: tuple[float, ...]
    rounds: int
    per_arm_pulls: tuple[int, ...]
    correct: Optional[bool]
    xi_held: bool
    converged: bool
    mode: str
    seed: tuple[int, ...]
    bound_value: Optional[float] = None
    bound_satisfied: Optional[bool] = None
    lemma_violations: Optional[int] = None
    final_box: Optional[ConfidenceBox] = None
    trace: Optional[tuple[CociState, ...]] = None
    sample_log: Optional[tuple[tuple[float, ...], ...]] = None


def run_coci(
    instance: ProblemInstance,
    delta: float,
    strategy: ConditionStrategy | None = None,
    seed: int | Sequence[int] = 0,
    max_rounds: int | None = None,
    *,
    h_lambda: float | None = None,
    lambda_lower: Sequence[float] | None = None,
    record_trace: bool = False,
    box_cap: float = 1.0,
) -> RunResult:
    """Run the adaptive sampler; see the module docstring."""
    return _run(
        instance,
        delta,
        strategy,
        seed,
        max_rounds,
        uniform=False,
        h_lambda=h_lambda,
        lambda_lower=lambda_lower,
        record_trace=record_trace,
        box_cap=box_cap,
    )


def run_uniform(
    instance: ProblemInstance,
    delta: float,
    strategy: ConditionStrategy | None = None,
    seed: int | Sequence[int] = 0,
    max_rounds: int | None = None,
    *,
    h_lambda: float | None = None,
    lambda_lower: Sequence[float] | None = None,
    record_trace: bool = False,
    box_cap: float = 1.0,
) -> RunResult:
    """Uniform-sampling ablation: pull the largest-radius arm overall."""
    return _run(
        instance,
        delta,
        strategy,
        seed,
        max_rounds,
        uniform=True,
        h_lambda=h_lambda,
        lambda_lower=lambda_lower,
        record_trace=record_trace,
        box_cap=box_cap,
    )


def _run(
    instance: ProblemInstance,
    delta: float,
    strategy: ConditionStrategy | None,
    seed: int | Sequence[int],
    max_rounds: int | None,
    *,
    uniform: bool,
    h_lambda: float | None,
    lambda_lower: Sequence[float] | None,
    record_trace: bool,
    box_cap: float,
) -> RunResult:
    if not (0.0 < delta < 1.0):
        raise UsageError(f"delta must be in (0, 1), got {delta!r}")
    oracle = instance.oracle
    m = oracle.arm_count
    if not instance.arm_models:
        raise UsageError("instance has no arm models to sample from")
    kind = instance.estimator_kind
    tau = kind.tau
    if strategy is None:
        strategy = default_strategy(oracle)

    bound_value = None
    if h_lambda is not None and math.isfinite(h_lambda):
        bound_value = sample_complexity_bound(h_lambda, m, tau, delta)
    if max_rounds is None:
        max_rounds = math.ceil(10 * bound_value) if bound_value is not None else _DEFAULT_MAX_ROUNDS
    if max_rounds < tau * m:
        raise UsageError(f"max_rounds={max_rounds} cannot cover initialization ({tau * m})")

    lam_half = None
    if lambda_lower is not None:
        if len(lambda_lower) != m:
            raise UsageError("lambda_lower must have one entry per arm")
        lam_half = [v / 2.0 for v in lambda_lower]

    seed_key = (int(seed),) if isinstance(seed, int) else tuple(int(v) for v in seed)
    streams = [BufferedArm(instance.arm_models[i], arm_stream(seed_key, i)) for i in range(m)]
    theta_star = instance.true_params.values

    pulls = [0] * m
    sums = [0.0] * m
    sums_sq = [0.0] * m
    est = [0.0] * m
    sample_log: list[list[float]] | None = [[] for _ in range(m)] if record_trace else None

    t = 0
    for i in range(m):
        for _ in range(tau):
            x = streams[i].next()
            sums[i] += x
            sums_sq[i] += x * x
            pulls[i] += 1
            t += 1
            if sample_log is not None:
                sample_log[i].append(x)
        est[i] = estimate_from_sums(kind, sums[i], sums_sq[i], tau)

    # Radii: sqrt((log(4 / (tau delta)) + 3 log t) / (2 pulls)).
    log_const = math.log(4.0 / (tau * delta))
    inv2 = [0.5 / pulls[i] for i in range(m)]
    level = log_const + 3.0 * math.log(t)
    rad = [math.sqrt(level * inv2[i]) for i in range(m)]
    lower = [max(0.0, min(box_cap, est[i] - rad[i])) for i in range(m)]
    upper = [min(box_cap, max(0.0, est[i] + rad[i])) for i in range(m)]

    xi_held = True
    for i in range(m):
        if abs(est[i] - theta_star[i]) > rad[i]:
            xi_held = False
            break

    lemma_violations = 0 if lam_half is not None else None
    trace: list[dict] | None = [] if record_trace else None
    if trace is not None:
        trace.append(_snapshot(t, pulls, est, rad, lower, upper, None, None))

    last_candidate = 0
    converged = True
    arms = list(range(m))

    while True:
        chosen = -1
        if trace is not None:
            # Full candidate set for the trace record.
            cands = [
                i for i in arms if candidate_on_bounds(strategy, oracle, lower, upper, i)
            ]
            trace[-1]["candidates"] = tuple(cands)
            if cands:
                chosen = min(cands, key=lambda a: (-rad[a], a))
        elif uniform:
            # Only emptiness matters for the uniform rule; check the last
            # known candidate first (no results are cached, just the order).
            if candidate_on_bounds(strategy, oracle, lower, upper, last_candidate):
                chosen = last_candidate
            else:
                for i in arms:
                    if i != last_candidate and candidate_on_bounds(
                        strategy, oracle, lower, upper, i
                    ):
                        chosen = i
                        break
        else:
            # Scanning arms by decreasing radius (ties: lower index), the
            # first candidate found is the argmax-radius candidate.
            for i in sorted(arms, key=lambda a: (-rad[a], a)):
                if candidate_on_bounds(strategy, oracle, lower, upper, i):
                    chosen = i
                    break

        if chosen < 0:
            output = oracle.maximizer(tuple(lower))
            break
        last_candidate = chosen
        if uniform:
            j = 0
            for i in range(1, m):
                if rad[i] > rad[j]:
                    j = i
        else:
            j = chosen
        if t >= max_rounds:
            converged = False
            output = oracle.maximizer(tuple(lower))
            break

        if lam_half is not None and rad[j] < lam_half[j]:
            lemma_violations += 1

        t += 1
        x = streams[j].next()
        sums[j] += x
        sums_sq[j] += x * x
        pulls[j] += 1
        inv2[j] = 0.5 / pulls[j]
        est[j] = estimate_from_sums(kind, sums[j], sums_sq[j], pulls[j])
        if sample_log is not None:
            sample_log[j].append(x)

        level = log_const + 3.0 * math.log(t)
        for i in arms:
            r = math.sqrt(level * inv2[i])
            rad[i] = r
            e = est[i]
            lower[i] = max(0.0, min(box_cap, e - r))
            upper[i] = min(box_cap, max(0.0, e + r))

        if xi_held:
            for i in arms:
                if abs(est[i] - theta_star[i]) > rad[i]:
                    xi_held = False
                    break
        if trace is not None:
            trace.append(_snapshot(t, pulls, est, rad, lower, upper, j, x))

    correct = None
    y_star = instance.optimal_decision()
    if y_star is not None:
        correct = tuple(output) == tuple(y_star)

    return RunResult(
        output=tuple(output),
        rounds=t,
        per_arm_pulls=tuple(pulls),
        correct=correct,
        xi_held=xi_held,
        converged=converged,
        mode="uniform" if uniform else "coci",
        seed=seed_key,
        bound_value=bound_value,
        bound_satisfied=(t <= bound_value) if bound_value is not None else None,
        lemma_violations=lemma_violations,
        final_box=ConfidenceBox(tuple(lower), tuple(upper)),
        trace=_freeze_trace(trace) if trace is not None else None,
        sample_log=tuple(tuple(s) for s in sample_log) if sample_log is not None else None,
    )


def _snapshot(t, pulls, est, rad, lower, upper, arm, obs) -> dict:
    return {
        "t": t,
        "pulls": tuple(pulls),
        "estimates": tuple(est),
        "radii": tuple(rad),
        "lower": tuple(lower),
        "upper": tuple(upper),
        "candidates": (),
        "pulled_arm": arm,
        "observation": obs,
    }


def _freeze_trace(records: list[dict]) -> tuple[CociState, ...]:
    return tuple(
        CociState(
            t=r["t"],
            pulls=r["pulls"],
            estimates=r["estimates"],
            radii=r["radii"],
            box=ConfidenceBox(r["lower"], r["upper"]),
            candidates=r["candidates"],
            pulled_arm=r["pulled_arm"],
            observation=r["observation"],
        )
        for r in records
    )


def audit_xi(trace: Sequence[CociState], true_params: Sequence[float]) -> bool:
    """True when every traced round kept all estimates within their radii.

    The trace must be complete: its rounds must be contiguous starting at
    the initialization round.
    """
    if not trace:
        raise UsageError("empty trace")
    start = trace[0].t
    truth = tuple(true_params)
    if len(truth) != len(trace[0].estimates):
        raise UsageError("true_params dimension does not match the trace")
    for offset, state in enumerate(trace):
        if state.t != start + offset:
            raise UsageError(f"trace is truncated or reordered at t={state.t}")
        for e, r, g in zip(state.estimates, state.radii, truth):
            if abs(e - g) > r:
                return False
    return True


def dump_trace(trace: Sequence[CociState], path: str | Path) -> None:
    """Write one JSON object per round: t, arm, observation, estimates,
    radii, and the candidate count."""
    with open(path, "w", encoding="utf-8") as fh:
        for state in trace:
            fh.write(
                json.dumps(
                    {
                        "t": state.t,
                        "arm": state.pulled_arm,
                        "observation": state.observation,
                        "estimates": list(state.estimates),
                        "radii": list(state.radii),
                        "candidates": len(state.candidates),
                    }
                )
            )
            fh.write("\n")
