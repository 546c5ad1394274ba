"""One-shot validation suite binding all layers together.

Each check compares two independently computed quantities (exact identities
in rational arithmetic where possible) and yields one report line with the
measured value. The suite is what `plateau-ea validate` runs; the acceptance
tests reuse pieces of it at their own grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import individual as ind
from . import levelchain as lc
from . import theory
from .mutation import AlphaDistribution, OperatorSpec, pmf_of


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.measured}"


def _ops_rational():
    return [
        ("rls", OperatorSpec.rls()),
        ("mix-1-2", OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})),
        ("stdbit-1", OperatorSpec.standard_bit(1)),
    ]


def _ops_two_level():
    # support within {0,1,2,3} so the two-level closed form applies
    return [
        ("rls", (Fraction(1), Fraction(0), Fraction(0))),
        ("mix-1-2", (Fraction(1, 2), Fraction(1, 2), Fraction(0))),
        ("mix-0123", (Fraction(3, 10), Fraction(2, 5), Fraction(1, 5))),
    ]


def rational_identity_checks(ns, ks, inject_fault: bool = False) -> list[CheckResult]:
    out = []
    rowsum_ok = balance_ok = True
    instances = 0
    float_balance_worst = 0.0
    first = True
    for n in ns:
        for k in ks:
            if 2 * k >= n:
                continue
            for _, spec in _ops_rational():
                dist = pmf_of(spec, n, exact=True)
                chain = lc.build(n, k, dist)
                instances += 1
                for i in range(k):
                    if sum(chain.P[i]) + chain.exit[i] != 1:
                        rowsum_ok = False
                    for j in range(k):
                        if math.comb(n, k - i) * chain.P[i][j] != math.comb(n, k - j) * chain.P[j][i]:
                            balance_ok = False
                # float-mode residual of the same identity, scaled
                fP = [[float(x) for x in row] for row in chain.P]
                if inject_fault and first:
                    fP[0][1] += 1e-6
                    first = False
                for i in range(k):
                    for j in range(k):
                        ci, cj = math.comb(n, k - i), math.comb(n, k - j)
                        num = abs(ci * fP[i][j] - cj * fP[j][i])
                        scale = max(ci * fP[i][j], cj * fP[j][i], 1.0)
                        float_balance_worst = max(float_balance_worst, num / scale)
    out.append(
        CheckResult(
            "row-sum identity (rational)",
            rowsum_ok,
            "exact" if rowsum_ok else "violated",
        )
    )
    out.append(
        CheckResult(
            "detailed balance (rational)",
            balance_ok,
            "exact" if balance_ok else "violated",
        )
    )
    out.append(
        CheckResult(
            "detailed balance (float residual)",
            float_balance_worst <= 1e-12,
            f"max rel residual {float_balance_worst:.3e} over {instances} chains",
        )
    )

    closed_form_ok = True
    count = 0
    for n in ns:
        if n <= 4:
            continue
        for _, (p1, p2, p3) in _ops_two_level():
            probs = [1 - p1 - p2 - p3, p1, p2, p3] + [Fraction(0)] * (n - 3)
            dist = AlphaDistribution(n, probs, exact=True)
            chain = lc.build(n, 2, dist)
            if theory.two_level_closed_form(n, p1, p2, p3) != lc.absorption_times(chain):
                closed_form_ok = False
            count += 1
    out.append(
        CheckResult(
            "two-level closed form vs solver (rational)",
            closed_form_ok,
            f"exact on {count} instances" if closed_form_ok else "mismatch",
        )
    )
    return out


def phi_suite_checks(instances) -> list[CheckResult]:
    out = []
    lin_ok = norm_ok = comm_ok = sym_ok = True
    incl_worst = 0.0
    absorb_worst = 0.0
    spread_worst = 0.0
    for n, k, spec in instances:
        dist = pmf_of(spec, n, exact=True)
        # linearity and Manhattan-norm invariance on a fixed rational probe
        x = [Fraction(2 * j + 1, 3 * j + 2) for j in range(k)]
        y = [Fraction(-(j + 1), j + 5) for j in range(k)]
        a, b = Fraction(5, 7), Fraction(-3, 11)
        lhs = ind.phi([a * xi + b * yi for xi, yi in zip(x, y)], n, k)
        rhs = [a * xi + b * yi for xi, yi in zip(ind.phi(x, n, k), ind.phi(y, n, k))]
        if lhs != rhs:
            lin_ok = False
        if sum(abs(v) for v in ind.phi(y, n, k)) != sum(abs(v) for v in y):
            norm_ok = False
        if ind.commutation_report(n, k, dist, exact=True).max_discrepancy != 0:
            comm_ok = False
        chain = ind.build_individual(n, k, dist, exact=True)
        for p in range(chain.size):
            for q in range(p + 1, chain.size):
                if chain.P[p][q] != chain.P[q][p]:
                    sym_ok = False
                    break
        rep = ind.spectrum_inclusion_report(n, k, dist)
        incl_worst = max(incl_worst, rep.max_distance)
        fchain = ind.build_individual(n, k, pmf_of(spec, n, exact=False))
        per_level, spread = ind.absorption_by_level(fchain)
        spread_worst = max(spread_worst, spread)
        level_times = lc.absorption_times(lc.build(n, k, dist))
        absorb_worst = max(
            absorb_worst,
            max(abs(a - float(b)) / float(b) for a, b in zip(per_level, level_times)),
        )
    out.append(CheckResult("embedding linearity (rational)", lin_ok, "exact" if lin_ok else "violated"))
    out.append(CheckResult("embedding norm invariance (rational)", norm_ok, "exact" if norm_ok else "violated"))
    out.append(CheckResult("embedding commutation (rational)", comm_ok, "exact" if comm_ok else "violated"))
    out.append(CheckResult("point-chain symmetry (rational)", sym_ok, "exact" if sym_ok else "violated"))
    out.append(
        CheckResult(
            "spectrum inclusion", incl_worst <= 1e-9, f"max distance {incl_worst:.3e}"
        )
    )
    out.append(
        CheckResult(
            "point-chain level symmetry of absorption",
            spread_worst <= 1e-9,
            f"max in-level spread {spread_worst:.3e}",
        )
    )
    out.append(
        CheckResult(
            "absorption agreement level vs points",
            absorb_worst <= 1e-9,
            f"max rel deviation {absorb_worst:.3e}",
        )
    )
    return out


def spectral_suite_checks(ns, ks, ops=None) -> list[CheckResult]:
    out = []
    defect_worst = 0.0
    residual_worst = 0.0
    bracket_ok = True
    gap_ok = True
    gap_k_ok = True  # the proof-variant bound with exponent k instead of k-1
    min_gap_margin = math.inf
    if ops is None:
        ops = [
            ("rls", OperatorSpec.rls()),
            ("mix-1-2", OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})),
        ]
    for n in ns:
        for k in ks:
            if 2 * k >= n:
                continue
            for _, spec in ops:
                dist = pmf_of(spec, n, exact=True)
                chain = lc.build(n, k, dist)
                s = lc.spectrum(chain)
                defect_worst = max(defect_worst, s.symmetry_defect)
                residual_worst = max(residual_worst, max(s.residuals))
                sums = [float(x) for x in lc.row_sums(chain)]
                if not (min(sums) - 1e-12 <= s.eigenvalues[0] <= max(sums) + 1e-12):
                    bracket_ok = False
                p1 = float(dist.p_one)
                gap = 1 - max(abs(l) for l in s.eigenvalues[1:])
                eps = float(lc.gap_bound(dist, k))
                eps_k = p1**k / ((k - 1) * 2**k)
                if gap < eps:
                    gap_ok = False
                if gap < eps_k:
                    gap_k_ok = False
                min_gap_margin = min(min_gap_margin, gap / eps)
    out.append(
        CheckResult(
            "symmetrization defect", defect_worst <= 1e-12, f"max {defect_worst:.3e}"
        )
    )
    out.append(
        CheckResult(
            "eigenpair residuals", residual_worst <= 1e-10, f"max {residual_worst:.3e}"
        )
    )
    out.append(CheckResult("Perron row-sum bracket", bracket_ok, "all inside" if bracket_ok else "violated"))
    out.append(
        CheckResult(
            "spectral gap >= bound (exponent k-1)",
            gap_ok,
            f"min gap/bound {min_gap_margin:.3f}; proof-variant exponent k "
            + ("also supported" if gap_k_ok else "not supported"),
        )
    )
    return out


def trend_checks() -> list[CheckResult]:
    out = []
    # conditional stationary distribution approaches the uniform image
    mono_ok = True
    detail = []
    for k in (2, 3):
        devs = []
        for n in (25, 50, 100, 200):
            dist = pmf_of(OperatorSpec.rls(), n, exact=True)
            chain = lc.build(n, k, dist)
            stat = lc.conditional_stationary(chain)
            u = lc.uniform_level_vector(n, k, exact=False)
            devs.append(max(abs(p / q - 1) for p, q in zip(stat.pi_star, u)))
        if not all(a > b for a, b in zip(devs, devs[1:])):
            mono_ok = False
        detail.append(f"k={k}: {devs[0]:.2e}->{devs[-1]:.2e}")
    out.append(CheckResult("stationary-vs-uniform convergence", mono_ok, "; ".join(detail)))

    ratio_ok = True
    detail = []
    for label, spec in (("rls", OperatorSpec.rls()), ("stdbit-1", OperatorSpec.standard_bit(1))):
        devs = []
        for n in (25, 50, 100, 200, 400):
            dist = pmf_of(spec, n, exact=True)
            chain = lc.build(n, 2, dist)
            u = lc.uniform_level_vector(n, 2)
            et = float(sum(p * t for p, t in zip(u, lc.absorption_times(chain))))
            devs.append(abs(et / theory.asymptotic_runtime(n, 2, dist) - 1))
        if not (all(a > b for a, b in zip(devs, devs[1:])) and devs[-1] <= 0.10):
            ratio_ok = False
        detail.append(f"{label}: {devs[0]:.3f}->{devs[-1]:.4f}")
    out.append(CheckResult("exact-vs-asymptotic runtime convergence", ratio_ok, "; ".join(detail)))

    size_ok = True
    ratios = []
    for n in (25, 50, 100, 200, 400):
        ratios.append(lc.plateau_size(n, 2) * math.factorial(2) / n**2)
    size_ok = all(r > 1 for r in ratios) and all(
        a > b for a, b in zip(ratios, ratios[1:])
    ) and ratios[-1] <= 1.1
    out.append(
        CheckResult(
            "plateau size vs n^k/k!",
            size_ok,
            f"ratio {ratios[0]:.4f}->{ratios[-1]:.4f}, decreasing toward 1",
        )
    )

    rep = lc.check_tail_envelope(12, 2, pmf_of(OperatorSpec.rls(), 12, exact=True))
    out.append(
        CheckResult(
            "tail envelope (n=12, full horizon)",
            rep.holds,
            f"min slack {rep.min_slack:.3f} at t={rep.argmin_t}",
        )
    )
    return out


def run_validation(inject_fault: bool = False, fast: bool = False) -> list[CheckResult]:
    if fast:
        ns = (6, 8, 10)
        ks = (2, 3)
        phi_instances = [
            (8, 2, OperatorSpec.rls()),
            (8, 2, OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})),
        ]
        spectral_ns = (10, 25, 50)
    else:
        ns = (6, 8, 10, 12, 14)
        ks = (2, 3)
        phi_instances = [
            (8, 2, OperatorSpec.rls()),
            (8, 2, OperatorSpec.standard_bit(1)),
            (10, 2, OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})),
            (9, 3, OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})),
        ]
        spectral_ns = (10, 25, 50, 100, 200)
    results = []
    results += rational_identity_checks(ns, ks, inject_fault=inject_fault)
    results += phi_suite_checks(phi_instances)
    results += spectral_suite_checks(spectral_ns, ks)
    if not fast:
        results += trend_checks()
    return results


def format_report(results) -> str:
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + ("" if n_fail == 0 else f", {n_fail} FAILED")
    )
    return "\n".join(lines)
