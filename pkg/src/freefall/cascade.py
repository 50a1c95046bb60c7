"""Evaluation map, mod-2 counts of connecting flow lines, and the cascade complex.

For each pair of consecutive circles the unstable directions of
``m_{k+1} in C_{k+1}`` inside ``V_k`` form a circle of angles ``theta``. Shooting
along each ``theta`` and reading off the limit phase on ``C_k`` gives the
evaluation map ``ev: S^1 -> C_k``. Flow lines from ``m_{k+1}`` to a regular value
``M_k`` are the solutions of ``ev(theta) = M_k``; only their number mod 2
enters the boundary ``d m_{k+1}``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import AmbiguousCrossing, ConsistencyFailure, FreeFallError, NoRegularValue, NotAComplex, SweepFailure
from .gf2 import gf2_nullspace, gf2_rank
from .heatflow import SolverConfig, shoot_unstable
from .linearization import cascade_index

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MIN_CONVERGENCE_RATE = 0.99


def wrap(x):
    """Map angles to ``(-pi, pi]``."""
    return -((-np.asarray(x) + math.pi) % TWO_PI - math.pi)


def circle_distance(a, b):
    return np.abs(wrap(np.asarray(a) - np.asarray(b)))


@dataclass
class EvTable:
    k: int
    thetas: np.ndarray
    ev_phases: np.ndarray
    converged_mask: np.ndarray
    base_phase: float = 0.0

    def __post_init__(self):
        if not (self.thetas.size == self.ev_phases.size == self.converged_mask.size):
            raise ValueError("EvTable arrays must have equal length")

    @property
    def convergence_rate(self) -> float:
        return float(np.mean(self.converged_mask))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta", "ev_phase", "converged"])
        for t, e, c in zip(self.thetas, self.ev_phases, self.converged_mask):
            writer.writerow([repr(float(t)), repr(float(e)) if c else "", int(c)])
        return buf.getvalue()


def _limit_phase(k: int, cfg: SolverConfig, base_phase: float, theta: float) -> float:
    try:
        traj = shoot_unstable(k, theta, cfg, base_phase)
    except FreeFallError as exc:
        log.warning("shot k=%d theta=%.6f failed: %s", k, theta, exc)
        return math.nan
    if not traj.converged or traj.limit_circle != k:
        return math.nan
    return traj.limit_phase


def _shoot_many(k: int, thetas, cfg: SolverConfig, base_phase: float, jobs: int) -> np.ndarray:
    fn = partial(_limit_phase, k, cfg, base_phase)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return np.array(list(pool.map(fn, thetas, chunksize=max(1, len(thetas) // (4 * jobs)))))
    return np.array([fn(t) for t in thetas])


def evaluation_map(k: int, cfg: SolverConfig, base_phase: float = 0.0, jobs: int = 1) -> EvTable:
    """Tabulate ``ev`` on ``cfg.theta_samples`` equispaced angles.

    Raises SweepFailure when fewer than 99% of the shots converge to ``C_k``.
    """
    thetas = TWO_PI * np.arange(cfg.theta_samples) / cfg.theta_samples
    phases = _shoot_many(k, thetas, cfg, base_phase, jobs)
    mask = np.isfinite(phases)
    table = EvTable(k, thetas, np.where(mask, phases, 0.0), mask, base_phase)
    if table.convergence_rate < MIN_CONVERGENCE_RATE:
        raise SweepFailure(f"only {table.convergence_rate:.1%} of shots for k={k} converged")
    return table


def _valid(table: EvTable) -> tuple[np.ndarray, np.ndarray]:
    return table.thetas[table.converged_mask], table.ev_phases[table.converged_mask]


def _crossing_pairs(thetas: np.ndarray, ev: np.ndarray, target: float) -> list[tuple[int, int]]:
    """Consecutive (cyclic) index pairs where ``ev - target`` changes sign without wrapping."""
    d = wrap(ev - target)
    nxt = np.roll(np.arange(ev.size), -1)
    sign_change = (d >= 0) != (d[nxt] >= 0)
    no_wrap = np.abs(d - d[nxt]) < math.pi
    return [(int(i), int(nxt[i])) for i in np.nonzero(sign_change & no_wrap)[0]]


def _local_extrema(ev: np.ndarray) -> np.ndarray:
    step = wrap(np.roll(ev, -1) - ev)
    prev = np.roll(step, 1)
    nonflat = (step != 0) & (prev != 0)
    return np.nonzero(nonflat & (np.sign(step) != np.sign(prev)))[0]


def select_M(
    k: int,
    table: EvTable,
    m_phase: float,
    cfg: SolverConfig | None = None,
    avoid=(),
) -> float:
    """Pick a regular value ``M_k`` of ``ev`` on ``C_k``, different from ``m_phase``.

    Candidates are the midpoints of a uniform phase grid with as many cells as
    the table has samples. A candidate is admissible if it is more than 0.1 rad
    from ``m_phase``, more than two cells from every value of ``ev`` at a local
    extremum, and every crossing of ``ev`` through it has discrete slope above
    ``cfg.slope_tol``. Among admissible candidates the one farthest from the
    critical values of ``ev`` (and from ``m_phase`` and ``avoid``) wins; ties go
    to the smallest phase.
    """
    cfg = cfg or SolverConfig()
    if table.k != k:
        raise ValueError(f"table is for k={table.k}, not k={k}")
    thetas, ev = _valid(table)
    steps = wrap(np.roll(ev, -1) - ev)
    if ev.size < 3 or np.all(np.abs(steps) < 1e-12):
        raise NoRegularValue("evaluation map is constant")

    n = table.thetas.size
    cell = TWO_PI / n
    candidates = (np.arange(n) + 0.5) * cell
    crit_values = ev[_local_extrema(ev)]

    dtheta = wrap(np.roll(thetas, -1) - thetas) % TWO_PI
    dtheta[dtheta == 0] = TWO_PI
    slopes = np.abs(steps) / dtheta
    d = wrap(ev[None, :] - candidates[:, None])
    d_next = np.roll(d, -1, axis=1)
    crossing = ((d >= 0) != (d_next >= 0)) & (np.abs(d - d_next) < math.pi)
    transversal = ~np.any(crossing & (slopes[None, :] <= cfg.slope_tol), axis=1)

    admissible = transversal & (circle_distance(candidates, m_phase) > 0.1)
    if crit_values.size:
        near_crit = circle_distance(candidates[:, None], crit_values[None, :]).min(axis=1) <= 2 * cell
        admissible &= ~near_crit
    if not admissible.any():
        raise NoRegularValue(f"no admissible regular value for k={k}")

    forbidden = np.concatenate((crit_values, [m_phase], np.asarray(avoid, dtype=float)))
    score = circle_distance(candidates[:, None], forbidden[None, :]).min(axis=1)
    score[~admissible] = -1.0
    return float(candidates[int(np.argmax(score))])


def find_crossings(table: EvTable, M: float, cfg: SolverConfig) -> list[float]:
    """Angles ``theta`` with ``ev(theta) = M``, each refined by bisection with fresh shots.

    Raises AmbiguousCrossing if a shot inside a bracket fails to converge or
    the refined crossing is not transversal.
    """
    thetas, ev = _valid(table)
    found = []
    for i, j in _crossing_pairs(thetas, ev, M):
        lo, hi = thetas[i], thetas[j]
        if hi <= lo:
            hi += TWO_PI
        d_lo, d_hi = float(wrap(ev[i] - M)), float(wrap(ev[j] - M))
        ev_lo, ev_hi = ev[i], ev[j]
        while hi - lo > cfg.bisect_tol:
            mid = 0.5 * (lo + hi)
            ev_mid = _limit_phase(table.k, cfg, table.base_phase, mid % TWO_PI)
            if not math.isfinite(ev_mid):
                raise AmbiguousCrossing(f"shot at theta={mid % TWO_PI:.9f} did not converge")
            d_mid = float(wrap(ev_mid - M))
            if (d_mid >= 0) == (d_lo >= 0):
                lo, d_lo, ev_lo = mid, d_mid, ev_mid
            else:
                hi, d_hi, ev_hi = mid, d_mid, ev_mid
        if (d_lo >= 0) == (d_hi >= 0):
            raise AmbiguousCrossing(f"bracket near theta={lo:.9f} lost its sign change")
        slope = abs(float(wrap(ev_hi - ev_lo))) / (hi - lo)
        if slope <= cfg.slope_tol:
            raise AmbiguousCrossing(f"crossing near theta={lo:.9f} has slope {slope:.3e}")
        found.append((0.5 * (lo + hi)) % TWO_PI)
    return sorted(found)


def count_mod2(table: EvTable, M: float, cfg: SolverConfig) -> tuple[int, str]:
    """Number of transversal solutions of ``ev(theta) = M`` and its parity."""
    count = len(find_crossings(table, M, cfg))
    return count, ("odd" if count % 2 else "even")


# --- chain complexes ------------------------------------------------------


@dataclass(frozen=True)
class CascadeGenerator:
    kind: str
    k: int
    degree: int
    phase: float

    @property
    def label(self) -> str:
        return f"{'M' if self.kind == 'max' else 'm'}_{self.k}"


@dataclass
class CascadeComplex:
    """Z/2 chain complex; ``boundary[i, j] = 1`` iff ``generators[i]`` occurs in ``d generators[j]``."""

    K: int
    generators: list[CascadeGenerator]
    boundary: np.ndarray
    counts: dict[tuple[int, int], int] = field(default_factory=dict)
    tables: dict[int, EvTable] = field(default_factory=dict, repr=False)

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.generators]

    def squares_to_zero(self) -> bool:
        b = self.boundary.astype(np.int64)
        return not np.any((b @ b) % 2)

    def respects_degree(self) -> bool:
        deg = np.array([g.degree for g in self.generators])
        rows, cols = np.nonzero(self.boundary)
        return bool(np.all(deg[cols] - deg[rows] == 1))

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "generators": [
                {"label": g.label, "kind": g.kind, "k": g.k, "degree": g.degree, "phase": g.phase}
                for g in self.generators
            ],
            "boundary": self.boundary.astype(int).tolist(),
            "counts": {f"m_{a}->M_{b}": c for (a, b), c in sorted(self.counts.items())},
            "parities": {f"m_{a}->M_{b}": c % 2 for (a, b), c in sorted(self.counts.items())},
        }


@dataclass
class HomologyResult:
    ranks: dict[int, int]
    truncation: int
    representatives: dict[int, list[list[str]]] = field(default_factory=dict)

    def betti(self, degree: int) -> int:
        return self.ranks.get(degree, 0)

    def nonzero(self) -> dict[int, int]:
        return {d: r for d, r in sorted(self.ranks.items()) if r}


def _pair_parity(
    k: int, cfg: SolverConfig, m_phase: float, jobs: int,
    table: EvTable | None = None, base_phase: float = 0.0,
) -> tuple[EvTable, float, int]:
    """Sweep (unless ``table`` is given) from ``m_{k+1}`` at ``base_phase``, pick ``M_k`` away from ``m_phase``, count."""
    if table is None or table.base_phase != base_phase:
        table = evaluation_map(k, cfg, base_phase=base_phase, jobs=jobs)
    M = select_M(k, table, m_phase, cfg)
    count, _ = count_mod2(table, M, cfg)
    log.info("k=%d: M_k=%.6f, %d crossing(s)", k, M, count)
    return table, M, count


def build_complex(
    K: int, cfg: SolverConfig, m_phases=None, jobs: int = 1, tables: dict[int, EvTable] | None = None
) -> CascadeComplex:
    """Cascade complex on the circles ``C_1..C_K``.

    ``d M_k = 0`` (the two arcs of the auxiliary function on ``C_k`` cancel) and
    ``d m_1 = 0``; ``d m_{k+1}`` is the parity of the computed count of flow
    lines from ``m_{k+1}`` to ``M_k``. The top maximum ``M_K`` is placed
    opposite ``m_K`` since no sweep constrains it. Precomputed evaluation
    tables (for base phase 0 and the same ``cfg``) may be passed in ``tables``.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if cfg.n_modes < K:
        raise ValueError(f"n_modes={cfg.n_modes} cannot hold circle {K}")
    m_phases = [0.0] * K if m_phases is None else [float(p) % TWO_PI for p in m_phases]
    if len(m_phases) != K:
        raise ValueError(f"need {K} phases for m_1..m_{K}, got {len(m_phases)}")
    counts, tables, M_phases = {}, {}, {}
    for k in range(1, K):
        table, M, count = _pair_parity(k, cfg, m_phases[k - 1], jobs, (tables or {}).get(k), m_phases[k])
        tables[k], M_phases[k], counts[(k + 1, k)] = table, M, count
    M_phases[K] = (m_phases[K - 1] + math.pi) % TWO_PI

    gens = []
    for k in range(1, K + 1):
        gens.append(CascadeGenerator("min", k, cascade_index("min", k), m_phases[k - 1]))
        gens.append(CascadeGenerator("max", k, cascade_index("max", k), M_phases[k]))
    boundary = np.zeros((2 * K, 2 * K), dtype=np.uint8)
    for k in range(1, K):
        # rows/cols: m_k at 2(k-1), M_k at 2(k-1)+1
        boundary[2 * (k - 1) + 1, 2 * k] = counts[(k + 1, k)] % 2
    cx = CascadeComplex(K, gens, boundary, counts, tables)
    if not cx.squares_to_zero():
        raise NotAComplex("boundary does not square to zero")
    return cx


def homology(cx: CascadeComplex) -> HomologyResult:
    """Z/2 Betti numbers ``dim ker d_n - rank d_{n+1}`` and representative cycles."""
    if not cx.squares_to_zero():
        raise NotAComplex("boundary does not square to zero")
    if not cx.respects_degree():
        raise NotAComplex("boundary does not lower degree by one")
    deg = np.array([g.degree for g in cx.generators])
    labels = cx.labels
    ranks, reps = {}, {}
    for d in range(int(deg.min()), int(deg.max()) + 1):
        here = np.nonzero(deg == d)[0]
        below = np.nonzero(deg == d - 1)[0]
        above = np.nonzero(deg == d + 1)[0]
        if here.size == 0:
            ranks[d] = 0
            continue
        d_out = cx.boundary[np.ix_(below, here)] if below.size else np.zeros((0, here.size), np.uint8)
        d_in = cx.boundary[np.ix_(here, above)] if above.size else np.zeros((here.size, 0), np.uint8)
        cycles = gf2_nullspace(d_out) if below.size else list(np.eye(here.size, dtype=np.uint8))
        image = [d_in[:, j] for j in range(d_in.shape[1])]
        chosen: list[np.ndarray] = []
        base_rank = gf2_rank(np.array(image)) if image else 0
        for z in cycles:
            trial = image + chosen + [z]
            if gf2_rank(np.array(trial)) > base_rank + len(chosen):
                chosen.append(z)
        ranks[d] = len(chosen)
        reps[d] = [[labels[here[i]] for i in np.nonzero(z)[0]] for z in chosen]
    for d in range(0, int(deg.min())):
        ranks[d] = 0
    return HomologyResult(ranks=dict(sorted(ranks.items())), truncation=cx.K, representatives=reps)


def restricted_complex(k: int, parity: int) -> CascadeComplex:
    """Four-generator complex of the action restricted to ``V_k``.

    Degrees: ``M_{k+1}`` 3, ``m_{k+1}`` 2, ``M_k`` 1, ``m_k`` 0.
    """
    gens = [
        CascadeGenerator("min", k, 0, 0.0),
        CascadeGenerator("max", k, 1, math.pi),
        CascadeGenerator("min", k + 1, 2, 0.0),
        CascadeGenerator("max", k + 1, 3, math.pi),
    ]
    boundary = np.zeros((4, 4), dtype=np.uint8)
    boundary[1, 2] = parity % 2
    return CascadeComplex(k, gens, boundary)


def restricted_complex_check(k: int, cfg: SolverConfig, parity: int | None = None, jobs: int = 1) -> HomologyResult:
    """Homology of the restricted complex; must be that of the 3-sphere.

    ``parity`` is computed from a sweep unless given. Raises
    ConsistencyFailure if degrees 1 or 2 carry homology.
    """
    if parity is None:
        _, _, count = _pair_parity(k, cfg, 0.0, jobs)
        parity = count % 2
    result = homology(restricted_complex(k, parity))
    if result.betti(1) or result.betti(2):
        raise ConsistencyFailure(
            f"restricted complex for k={k} has H_1={result.betti(1)}, H_2={result.betti(2)}; "
            "the count m_{k+1} -> M_k must be odd"
        )
    return result
