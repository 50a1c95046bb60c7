"""The ten acceptance criteria, each returning a pass/fail line with details.

Sweeps of the evaluation map are the dominant cost; they are cached on the
``Acceptance`` instance so that criteria 6, 7 and 8 share them.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cascade import EvTable, build_complex, count_mod2, evaluation_map, homology, restricted_complex_check, select_M
from .critical import CriticalPoint, amplitude, critical_value, expand
from .fourier import FourierLoop, action, gradient, inner_metric, norm_sq
from .heatflow import SolverConfig, fit_decay_rate, mode_interval_check, shoot_unstable
from .hessian import closed_form_eigenvalues, hessian_apply, spectrum_numeric
from .linearization import cascade_index, fredholm_chain, fredholm_index, lincheck_report

log = logging.getLogger(__name__)

FOUR_PI_SQ = 4.0 * math.pi**2


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


@dataclass
class Acceptance:
    cfg: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0
    jobs: int = 1
    _tables: dict = field(default_factory=dict, repr=False)
    _parities: dict = field(default_factory=dict, repr=False)

    # --- shared sweeps ----------------------------------------------------

    def table(self, k: int, cfg: SolverConfig | None = None) -> EvTable:
        cfg = cfg or self.cfg
        key = (k, cfg)
        if key not in self._tables:
            self._tables[key] = evaluation_map(k, cfg, jobs=self.jobs)
        return self._tables[key]

    def count(self, k: int, cfg: SolverConfig | None = None, avoid=()) -> tuple[float, int]:
        cfg = cfg or self.cfg
        table = self.table(k, cfg)
        M = select_M(k, table, 0.0, cfg, avoid=avoid)
        count, _ = count_mod2(table, M, cfg)
        return M, count

    # --- criteria ---------------------------------------------------------

    def criterion_1(self) -> tuple[bool, str]:
        worst = 0.0
        for k in range(1, 9):
            exact = 2.0 ** (1.0 / 3.0) * 3.0 * (math.pi * k) ** (2.0 / 3.0)
            for j in range(8):
                value = action(expand(CriticalPoint(k, 2.0 * math.pi * j / 8), 16))
                worst = max(worst, abs(value - exact) / exact)
        return worst < 1e-12, f"max relative error {worst:.2e} over k=1..8, 8 phases"

    def criterion_2(self) -> tuple[bool, str]:
        n = 16
        worst, bad = 0.0, []
        worst_phase = 0.0
        for k in range(1, 5):
            ref = closed_form_eigenvalues(k, n)
            expected = np.sort(np.repeat([p[0] for p in ref], [p[1] for p in ref]))
            first = None
            for j in range(8):
                rep = spectrum_numeric(CriticalPoint(k, 2.0 * math.pi * j / 8), n)
                tol = np.maximum(1e-6, 1e-9 * np.abs(expected))
                err = np.abs(rep.eigenvalues - expected)
                worst = max(worst, float(err.max()))
                if np.any(err > tol) or rep.morse_index != 2 * k - 1 or rep.nullity != 1:
                    bad.append((k, j))
                if first is None:
                    first = rep.eigenvalues
                worst_phase = max(worst_phase, float(np.max(np.abs(rep.eigenvalues - first))))
        ok = not bad and worst_phase < 1e-8
        return ok, (
            f"max |numeric - closed form| {worst:.2e}, phase variation {worst_phase:.2e}, "
            f"index/nullity mismatches {len(bad)}"
        )

    def criterion_3(self) -> tuple[bool, str]:
        rng = np.random.default_rng(self.seed)
        grad_worst = 0.0
        for _ in range(100):
            while True:
                n = int(rng.integers(1, 17))
                q = FourierLoop.from_vector(rng.uniform(-1.0, 1.0, 2 * n + 1))
                if norm_sq(q) > 0.1:
                    break
            xi = FourierLoop.from_vector(rng.uniform(-1.0, 1.0, 2 * n + 1))
            tau = 1e-5
            fd = (action(q + tau * xi) - action(q - tau * xi)) / (2.0 * tau)
            exact = inner_metric(gradient(q), xi, q)
            grad_worst = max(grad_worst, abs(fd - exact) / abs(exact))
        hess_worst = 0.0
        for _ in range(100):
            cp = CriticalPoint(int(rng.integers(1, 5)), float(rng.uniform(0.0, 2.0 * math.pi)))
            q = expand(cp, 16)
            xi = FourierLoop.from_vector(rng.uniform(-1.0, 1.0, 33))
            tau = 1e-4
            fd = (action(q + tau * xi) - 2.0 * action(q) + action(q - tau * xi)) / tau**2
            exact = inner_metric(hessian_apply(cp, xi), xi, q)
            hess_worst = max(hess_worst, abs(fd - exact) / abs(exact))
        ok = grad_worst < 1e-6 and hess_worst < 1e-4
        return ok, f"gradient rel err {grad_worst:.2e} (tol 1e-6), Hessian rel err {hess_worst:.2e} (tol 1e-4)"

    def _shots(self):
        if not hasattr(self, "_shot_cache"):
            self._shot_cache = [
                (k, shoot_unstable(k, 2.0 * math.pi * j / 25, self.cfg)) for k in (1, 2) for j in range(25)
            ]
        return self._shot_cache

    def criterion_4(self) -> tuple[bool, str]:
        rise, amp_err, leak, failures = 0.0, 0.0, 0.0, 0
        for k, traj in self._shots():
            rise = max(rise, float(np.max(np.diff(traj.action_values), initial=-np.inf)))
            if not mode_interval_check(traj, k, k + 1, 0.0):
                failures += 1
            if not (traj.converged and traj.limit_circle == k):
                failures += 1
                continue
            amps = traj.final.amplitudes()
            amp_err = max(amp_err, abs(amps[k - 1] - amplitude(k)))
            leak = max(leak, abs(traj.final.a0), float(np.max(np.delete(amps, k - 1))))
        ok = failures == 0 and rise <= 1e-10 and amp_err < 1e-6 and leak < 1e-6
        return ok, (
            f"50 shots: max action increase {rise:.2e}, amplitude error {amp_err:.2e}, "
            f"off-circle modes {leak:.2e}, failures {failures}"
        )

    def criterion_5(self) -> tuple[bool, str]:
        worst = 0.0
        for k, traj in self._shots():
            rate = fit_decay_rate(traj)
            worst = max(worst, abs(rate / (FOUR_PI_SQ * (2 * k + 1)) - 1.0))
        return worst < 0.1, f"max |fitted rate / 4 pi^2 (2k+1) - 1| = {worst:.2e}"

    def parity_variants(self, k: int) -> dict[str, int]:
        if k in self._parities:
            return self._parities[k]
        base = self.cfg
        M, count = self.count(k)
        out = {"base": count}
        _, out["second_M"] = self.count(k, avoid=(M,))
        _, out["double_theta"] = self.count(k, base.replace(theta_samples=2 * base.theta_samples))
        _, out["eps_x10"] = self.count(k, base.replace(eps_unstable=10.0 * base.eps_unstable))
        _, out["eps_div10"] = self.count(k, base.replace(eps_unstable=0.1 * base.eps_unstable))
        _, out["rk4"] = self.count(k, base.replace(scheme="rk4", step=min(base.step, 2.5e-4)))
        self._parities[k] = out
        return out

    def criterion_6(self) -> tuple[bool, str]:
        parts, ok = [], True
        for k in (1, 2):
            counts = self.parity_variants(k)
            ok &= all(c % 2 == 1 for c in counts.values())
            parts.append(f"k={k} counts " + ",".join(f"{n}={c}" for n, c in counts.items()))
        return ok, "; ".join(parts)

    def criterion_7(self) -> tuple[bool, str]:
        parts, ok = [], True
        for k in (1, 2):
            parity = self.parity_variants(k)["base"] % 2
            try:
                res = restricted_complex_check(k, self.cfg, parity=parity)
                betti = tuple(res.betti(d) for d in range(4))
            except Exception as exc:
                betti = f"{type(exc).__name__}"
            ok &= betti == (1, 0, 0, 1)
            parts.append(f"k={k} Betti {betti}")
        return ok, "; ".join(parts)

    def criterion_8(self) -> tuple[bool, str]:
        K = 5
        tables = {k: self.table(k) for k in range(1, K)}
        cx = build_complex(K, self.cfg, jobs=self.jobs, tables=tables)
        res = homology(cx)
        expected = {d: (1 if d in (1, 2 * K) else 0) for d in range(0, 2 * K + 1)}
        ok = res.ranks == expected and res.representatives.get(1) == [["m_1"]]
        return ok, f"Betti {res.nonzero()}, degree-1 representative {res.representatives.get(1)}"

    def criterion_9(self) -> tuple[bool, str]:
        rep = lincheck_report(1, 1.0, self.cfg, seed=self.seed)
        adj = rep["adjoint_discrepancy"]
        const = rep["constant_adjoint_discrepancy"]
        fd = list(rep["fd_deviation"].values())
        ok = (
            rep["converged"]
            and adj[0] < 1e-3
            and adj[1] <= 0.3 * adj[0]
            and adj[2] <= 0.3 * adj[1]
            and max(const) < 1e-3
            and rep["fd_order"] > 1.8
            and rep["interval_closure_defect"] <= 1e-14
        )
        return ok, (
            f"adjoint h,h/2,h/4 = {adj[0]:.2e},{adj[1]:.2e},{adj[2]:.2e}; constant {max(const):.1e}; "
            f"fd tau=1e-3,1e-4 = {fd[0]:.2e},{fd[1]:.2e} (order {rep['fd_order']:.2f}); "
            f"closure defect {rep['interval_closure_defect']:.1e}"
        )

    def criterion_10(self) -> tuple[bool, str]:
        ok = True
        for k in range(1, 11):
            chain = fredholm_chain(k)
            ok &= all(v == 1 for v in chain.values())
            ok &= fredholm_index(("min", k + 1), ("max", k)) == 1
            ok &= cascade_index("max", k) == 2 * k and cascade_index("min", k) == 2 * k - 1
        return ok, "index chain equals 1 for k=1..10"

    NAMES = {
        1: "critical values",
        2: "spectrum oracle equivalence",
        3: "gradient and Hessian consistency",
        4: "flow invariants",
        5: "exponential tail",
        6: "parity of connecting flow lines",
        7: "restricted homology",
        8: "homology at truncation K=5",
        9: "linearization",
        10: "index bookkeeping",
    }

    def run(self, number: int) -> CriterionResult:
        t0 = time.perf_counter()
        try:
            ok, detail = getattr(self, f"criterion_{number}")()
        except Exception as exc:  # a crash is a failure of the criterion, not of the harness
            log.exception("criterion %d raised", number)
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        return CriterionResult(number, self.NAMES[number], bool(ok), detail, time.perf_counter() - t0)

    def run_all(self) -> list[CriterionResult]:
        return [self.run(i) for i in range(1, 11)]
