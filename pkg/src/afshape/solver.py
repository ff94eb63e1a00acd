"""Cyclic block-coordinate solver for region-suppressed AF shaping.

The design problem is to minimize the quartic region energy

    C(x) = sum_{(k,p) in region} |x^H A_{k,p} x|^2,    |x_n| = 1,

which this module attacks through the separable surrogate

    M2(x, u) = sum_{(k,p)} ||Ar^{1/2} x - sqrt(zeta N) u^r_{k,p}||^2
                         + ||Ai^{1/2} x - sqrt(zeta N) u^i_{k,p}||^2

built from the loaded Hermitian square roots (see reformulation) and one
auxiliary unit vector per loaded matrix. Two blocks alternate:

* u-step: for fixed x the minimizer is closed form,
  u = root @ x / ||root @ x||, applied independently per (k, p).
* x-step: for fixed u, M2 equals (up to an additive constant) the
  quadratic form [x; 1]^H B [x; 1]. Subtracting B from gamma_x * I with
  gamma_x at or above B's top eigenvalue flips the minimization into
  maximizing a PSD quadratic form over unit-modulus entries, which the
  power-method-like iteration  x <- exp(j arg(head of D [x; 1]))
  improves monotonically. The trailing entry stays pinned at 1.

Each full cycle therefore never increases M2. The quartic C is evaluated
once per outer iteration for the stopping rule
|C_t - C_{t-1}| <= epsilon * C_{t-1} and recorded, together with M2 and
wall time, in a ConvergenceTrace. With an identical config and seed the
solve is fully deterministic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .af_core import CodeSequence, RegionSpec, eval_objective
from .reformulation import LoadedRegion, build_loaded_region


@dataclass
class SolverConfig:
    """Validated bundle of every knob one solve depends on."""

    n: int
    region: RegionSpec
    gamma1: int = 1000
    gamma2: int = 500
    epsilon: float = 1e-6
    seed: int = 0
    zeta_policy: str = "exact"
    delta: float = 0.01
    gamma_x_mode: str = "frobenius"
    inner_epsilon: float | None = None

    def __post_init__(self) -> None:
        for name in ("n", "gamma1", "gamma2", "seed"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            setattr(self, name, int(value))
        if self.n < 2:
            raise ValueError(f"code length must be >= 2, got {self.n}")
        if self.gamma1 < 1:
            raise ValueError(f"gamma1 must be >= 1, got {self.gamma1}")
        if self.gamma2 < 1:
            raise ValueError(f"gamma2 must be >= 1, got {self.gamma2}")
        self.epsilon = float(self.epsilon)
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        self.delta = float(self.delta)
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.zeta_policy not in ("exact", "bound"):
            raise ValueError(f"zeta_policy must be 'exact' or 'bound', got {self.zeta_policy!r}")
        if self.gamma_x_mode not in ("frobenius", "eigen"):
            raise ValueError(f"gamma_x_mode must be 'frobenius' or 'eigen', got {self.gamma_x_mode!r}")
        if self.inner_epsilon is not None:
            self.inner_epsilon = float(self.inner_epsilon)
            if self.inner_epsilon <= 0:
                raise ValueError(f"inner_epsilon must be > 0 when set, got {self.inner_epsilon}")
        self.region.validate_for(self.n)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": list(self.region.delays),
            "p": list(self.region.dopplers),
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "zeta_policy": self.zeta_policy,
            "delta": self.delta,
            "gamma_x_mode": self.gamma_x_mode,
            "inner_epsilon": self.inner_epsilon,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SolverConfig":
        known = {"n", "k", "p", "gamma1", "gamma2", "epsilon", "seed",
                 "zeta_policy", "delta", "gamma_x_mode", "inner_epsilon"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for required in ("n", "k", "p"):
            if required not in data:
                raise ValueError(f"missing required config key {required!r}")
        kwargs = {key: value for key, value in data.items() if key not in ("n", "k", "p")}
        if kwargs.get("inner_epsilon", 0) is None:
            kwargs.pop("inner_epsilon")
        region = RegionSpec(delays=tuple(data["k"]), dopplers=tuple(data["p"]))
        return cls(n=data["n"], region=region, **kwargs)


@dataclass(eq=False)
class AuxiliarySet:
    """Auxiliary unit vectors, one pair per (k, p) of the region."""

    u_r: dict
    u_i: dict


@dataclass(eq=False)
class ConvergenceTrace:
    """Per-outer-iteration record of one solve.

    Row 0 describes the initial code (before any iteration). When the
    inner trace is collected, inner_objectives[i] holds the UQP objective
    values of outer iteration i + 1 (there is no inner block behind row 0).
    """

    outer_iters: list = field(default_factory=list)
    c_values: list = field(default_factory=list)
    m2_values: list = field(default_factory=list)
    elapsed_ms: list = field(default_factory=list)
    inner_objectives: list | None = None

    def record(self, outer_iter: int, c_value: float, m2_value: float,
               elapsed: float, inner=None) -> None:
        self.outer_iters.append(int(outer_iter))
        self.c_values.append(float(c_value))
        self.m2_values.append(float(m2_value))
        self.elapsed_ms.append(float(elapsed))
        if self.inner_objectives is not None and inner is not None:
            self.inner_objectives.append([float(v) for v in inner])

    def to_csv(self, path) -> None:
        """Deterministic CSV: timing stays out so reruns are byte-identical."""
        lines = ["outer_iter,C,m2_objective"]
        for t, c, m2 in zip(self.outer_iters, self.c_values, self.m2_values):
            lines.append(f"{t},{c:.17g},{m2:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "outer_iter": list(self.outer_iters),
            "C": list(self.c_values),
            "m2_objective": list(self.m2_values),
            "elapsed_ms": list(self.elapsed_ms),
            "inner_objectives": self.inner_objectives,
        }


@dataclass(eq=False)
class SolverState:
    """Mutable view of one running solve, handed to the outer-step callback."""

    x: CodeSequence
    aux: AuxiliarySet
    loaded: LoadedRegion
    trace: ConvergenceTrace
    outer_iter: int


def init_random_code(n: int, seed: int) -> CodeSequence:
    """Random unimodular code: phases i.i.d. uniform on [0, 2 pi)."""
    rng = np.random.default_rng(seed)
    return CodeSequence(phases=rng.uniform(0.0, 2.0 * np.pi, n))


def update_aux(x: CodeSequence, loaded: LoadedRegion) -> AuxiliarySet:
    """Closed-form minimizers of M2 over the unit vectors, for fixed x.

    u = root @ x / ||root @ x|| maximizes Re{x^H root u} over the unit
    sphere, which is exactly the u-dependence of M2 with its sign flipped.
    """
    values = x.values
    u_r = {}
    u_i = {}
    for key, pair in loaded.pairs.items():
        vr = pair.ar_root @ values
        vi = pair.ai_root @ values
        nr = np.linalg.norm(vr)
        ni = np.linalg.norm(vi)
        # positive definiteness of the loaded matrices keeps both nonzero
        assert nr > 0.0 and ni > 0.0
        u_r[key] = vr / nr
        u_i[key] = vi / ni
    return AuxiliarySet(u_r=u_r, u_i=u_i)


def m2_objective(x: CodeSequence, aux: AuxiliarySet, loaded: LoadedRegion) -> float:
    """Surrogate objective evaluated from its definition (sum of squared norms)."""
    values = x.values
    scale = math.sqrt(loaded.zeta * loaded.n)
    total = 0.0
    for key, pair in loaded.pairs.items():
        total += float(np.linalg.norm(pair.ar_root @ values - scale * aux.u_r[key]) ** 2)
        total += float(np.linalg.norm(pair.ai_root @ values - scale * aux.u_i[key]) ** 2)
    return total


def build_bx(aux: AuxiliarySet, loaded: LoadedRegion) -> np.ndarray:
    """Hermitian (N+1) x (N+1) form B with [x; 1]^H B [x; 1] = M2 - const.

    The constant is 2 * region.size * zeta * N (from the unit norms of the
    auxiliary vectors and ||x||^2 = N). The top-left block is the cached
    region-wide sum of loaded matrices; the border carries the cross terms
    against the auxiliary vectors.
    """
    n = loaded.n
    scale = math.sqrt(loaded.zeta * n)
    linear = np.zeros(n, dtype=complex)
    for key, pair in loaded.pairs.items():
        linear += pair.ar_root @ aux.u_r[key] + pair.ai_root @ aux.u_i[key]
    linear *= -scale
    bx = np.zeros((n + 1, n + 1), dtype=complex)
    bx[:n, :n] = loaded.quad_sum
    bx[:n, n] = linear
    bx[n, :n] = np.conj(linear)
    return bx


def build_uqp(aux: AuxiliarySet, loaded: LoadedRegion,
              gamma_x_mode: str = "frobenius") -> np.ndarray:
    """PSD matrix D = gamma_x * I - B whose UQP maximization is the x-step.

    gamma_x_mode="frobenius" uses ||B||_F, a cheap upper bound on the top
    eigenvalue of a Hermitian matrix; "eigen" computes the top eigenvalue
    exactly and nudges it up by a relative 1e-12.
    """
    bx = build_bx(aux, loaded)
    if gamma_x_mode == "frobenius":
        gamma_x = float(np.linalg.norm(bx))
    elif gamma_x_mode == "eigen":
        top = float(np.linalg.eigvalsh(bx)[-1])
        gamma_x = top + 1e-12 * max(1.0, abs(top))
    else:
        raise ValueError(f"gamma_x_mode must be 'frobenius' or 'eigen', got {gamma_x_mode!r}")
    return gamma_x * np.eye(bx.shape[0]) - bx


def pmli_inner(d_mat: np.ndarray, x_start: CodeSequence, gamma2: int,
               inner_epsilon: float | None = None, track_objective: bool = False):
    """Power-method-like iterations on the pinned-tail UQP.

    Repeats x <- exp(j arg(first N entries of D [x; 1])) for gamma2 steps;
    the trailing entry of the lifted vector stays pinned at 1. For PSD D
    the objective [x; 1]^H D [x; 1] never decreases. Entries of D [x; 1]
    that are exactly zero keep their previous phase, which leaves the
    objective unchanged and keeps runs deterministic.

    When inner_epsilon is set, iteration stops early once the objective's
    relative change drops to that level. With track_objective=True the
    return value is (code, objectives) where objectives holds the UQP
    objective of every visited iterate (at most gamma2 + 1 values).
    """
    d_mat = np.asarray(d_mat)
    n = x_start.n
    if d_mat.shape != (n + 1, n + 1):
        raise ValueError(f"UQP matrix must be {(n + 1, n + 1)} for a length-{n} code, "
                         f"got {d_mat.shape}")
    if gamma2 < 1:
        raise ValueError(f"gamma2 must be >= 1, got {gamma2}")
    track = track_objective or inner_epsilon is not None
    phases = x_start.phases.copy()
    xbar = np.empty(n + 1, dtype=complex)
    xbar[n] = 1.0
    objectives = []
    stalled = False
    for _ in range(gamma2):
        xbar[:n] = np.exp(1j * phases)
        y = d_mat @ xbar
        if track:
            obj = float(np.real(np.vdot(xbar, y)))
            if (objectives and inner_epsilon is not None
                    and abs(obj - objectives[-1]) <= inner_epsilon * abs(objectives[-1])):
                objectives.append(obj)
                stalled = True
                break
            objectives.append(obj)
        head = y[:n]
        new_phases = np.angle(head)
        zero = head == 0
        if np.any(zero):
            new_phases[zero] = phases[zero]
        phases = new_phases
    result = CodeSequence(phases=phases)
    if track_objective:
        if not stalled:
            xbar[:n] = np.exp(1j * phases)
            objectives.append(float(np.real(np.vdot(xbar, d_mat @ xbar))))
        return result, np.asarray(objectives)
    return result


def run(config: SolverConfig, collect_inner: bool = False, on_outer=None):
    """Execute the full cyclic solve; returns (final code, trace).

    One outer iteration builds the UQP matrix from the current auxiliary
    vectors, runs gamma2 inner power-method-like steps on the code, then
    refreshes the auxiliary vectors at the new code. The loop stops when
    the quartic objective's relative change falls to epsilon or after
    gamma1 outer iterations, whichever comes first. Pass on_outer to
    observe the SolverState after each outer iteration.
    """
    loaded = build_loaded_region(config.n, config.region, delta=config.delta,
                                 zeta_policy=config.zeta_policy)
    x = init_random_code(config.n, config.seed)
    aux = update_aux(x, loaded)
    trace = ConvergenceTrace(inner_objectives=[] if collect_inner else None)
    start = time.perf_counter()
    c_prev = eval_objective(x, config.region)
    trace.record(0, c_prev, m2_objective(x, aux, loaded), 0.0)
    state = SolverState(x=x, aux=aux, loaded=loaded, trace=trace, outer_iter=0)
    for t in range(1, config.gamma1 + 1):
        d_mat = build_uqp(aux, loaded, gamma_x_mode=config.gamma_x_mode)
        inner = None
        if collect_inner:
            x, inner = pmli_inner(d_mat, x, config.gamma2,
                                  inner_epsilon=config.inner_epsilon,
                                  track_objective=True)
        else:
            x = pmli_inner(d_mat, x, config.gamma2, inner_epsilon=config.inner_epsilon)
        aux = update_aux(x, loaded)
        c_now = eval_objective(x, config.region)
        elapsed = (time.perf_counter() - start) * 1e3
        trace.record(t, c_now, m2_objective(x, aux, loaded), elapsed, inner)
        state.x = x
        state.aux = aux
        state.outer_iter = t
        if on_outer is not None:
            on_outer(state)
        if abs(c_now - c_prev) <= config.epsilon * abs(c_prev):
            break
        c_prev = c_now
    return x, trace
