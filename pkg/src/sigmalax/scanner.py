"""Parameter scans over action families, with exact loci from sympy.

A scan evaluates the integrability check at every point of a rational
lattice. Independently, the grade-by-grade residuals are built as polynomials
in the family parameters and solved with sympy, which yields the integrable
strata as explicit equations. Each emitted locus is backed by at least one
grid point carrying a matching verdict.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import sympy as sp

from . import exact
from .algebra import GradedLieAlgebra, direct_sum, sl
from .catalog import doubled_blocks, general_z2_pair
from .integrability import NOT_INTEGRABLE, IntegrabilityReport, check
from .operators import ChiralOperatorPair, from_action

ALPHA, BETA, GAMMA = sp.symbols("alpha beta gamma")


@dataclass
class ScanResult:
    family: str
    params: tuple[str, ...]
    grid: list[tuple]
    verdicts: list[dict]
    classified_loci: list[tuple[str, list[str]]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def integrable_points(self) -> list[tuple]:
        return [p for p, v in zip(self.grid, self.verdicts) if v["verdict"] != NOT_INTEGRABLE]

    def verdict_at(self, point: Sequence) -> dict:
        key = tuple(exact.frac(x) for x in point)
        return self.verdicts[self.grid.index(key)]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "points": [
                {"params": [exact.fstr(x) for x in p], **v} for p, v in zip(self.grid, self.verdicts)
            ],
            "loci": [{"description": d, "equations": eqs} for d, eqs in self.classified_loci],
            "notes": list(self.notes),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.params, "verdict", "residual_norm", "label"])
        for p, v in zip(self.grid, self.verdicts):
            w.writerow([*(exact.fstr(x) for x in p), v["verdict"], v["residual_norm"], v["label"]])
        return buf.getvalue()


def lattice(lo, hi, step=1, dims: int = 2) -> list[tuple[Fraction, ...]]:
    """All points of ``{lo, lo + step, ..., hi}^dims`` in lexicographic order."""
    lo, hi, step = exact.frac(lo), exact.frac(hi), exact.frac(step)
    if step <= 0:
        raise ValueError("step must be positive")
    axis = []
    x = lo
    while x <= hi:
        axis.append(x)
        x += step
    return list(itertools.product(axis, repeat=dims))


def residual_norm(report: IntegrabilityReport) -> Fraction:
    """Largest absolute residual entry at the chosen (or zero) projector."""
    best = exact.ZERO
    if report.mode == "graded":
        vac = set(report.vacuous)
        for tab in report.residual_table.values():
            for j, row in enumerate(tab):
                for k, x in enumerate(row):
                    if (j, k) not in vac:
                        best = max(best, abs(x))
    else:
        for rows in report.residual_table.values():
            for _, v in rows:
                best = max([best, *(abs(x) for x in v)])
    return best


def _summary(report: IntegrabilityReport, label: str) -> dict:
    pi = report.chosen_pi
    if isinstance(pi, dict):
        pi = {str(k): exact.fstr(v) for k, v in sorted(pi.items())}
    elif pi is not None:
        pi = exact.to_strings(pi)
    return {
        "verdict": report.verdict,
        "residual_norm": exact.fstr(residual_norm(report)),
        "label": label,
        "chosen_pi": pi,
        "constraint_positions": [list(p) for p in report.constraint_positions],
    }


# symbolic residuals --------------------------------------------------------------------


def symbolic_residuals(alg: GradedLieAlgebra, plus: Sequence, minus: Sequence, pis: Sequence) -> list:
    """Graded residual polynomials ``(M-+ + pi_m) M+-`` on every live grade pair.

    ``plus``/``minus`` are per-grade sympy expressions, ``pis`` the per-grade
    projector scalars (zero where no kernel is allowed).
    """
    n = alg.grading_order
    out = []
    for j in range(n):
        for k in range(n):
            if not alg.bracket_nonzero(k, j):
                continue
            m = (j + k) % n
            mp = plus[m] - plus[k] - minus[j]
            mm_ = minus[m] - plus[k] - minus[j]
            out.append(sp.expand((mm_ + pis[m]) * mp))
            out.append(sp.expand((mp + pis[m]) * mm_))
    return [r for r in out if r != 0]


def _solve_loci(cases: Iterable[tuple[list, list, dict]], unknowns: Sequence) -> list[dict]:
    """Solve each case's polynomial system and merge solution families.

    Each case is ``(residuals, extra_equations, pi_symbols)``; extra equations
    encode the conditions under which a projector scalar may be nonzero.
    """
    found: list[dict] = []
    for residuals, extra, pis in cases:
        eqs = [e for e in residuals + extra if e != 0]
        if not eqs:
            continue
        for sol in sp.solve(eqs, list(unknowns) + list(pis.values()), dict=True):
            params = {s: v for s, v in sol.items() if s in unknowns}
            pi_vals = {name: sol.get(sym, sym) for name, sym in pis.items()}
            entry = {"params": params, "pi": pi_vals}
            if entry not in found:
                found.append(entry)
    return found


def _equations(params: dict, unknowns: Sequence) -> list[str]:
    if not params:
        return ["(all parameters)"]
    return [f"{s} = {params[s]}" for s in unknowns if s in params]


def _on_locus(point: Sequence, params: dict, unknowns: Sequence) -> bool:
    sub = dict(zip(unknowns, (sp.Rational(x.numerator, x.denominator) for x in point)))
    return all(sp.simplify(sub[s] - v.subs(sub)) == 0 for s, v in params.items())


def _contains(outer: dict, inner: dict) -> bool:
    """Whether the solution family ``inner`` lies inside ``outer``."""
    return all(sp.simplify((s - v).subs(inner, simultaneous=True)) == 0 for s, v in outer.items())


def _attach_loci(result: ScanResult, loci: list[dict], unknowns: Sequence, namer) -> None:
    backed = []
    for locus in loci:
        if any(
            v["verdict"] != NOT_INTEGRABLE and _on_locus(p, locus["params"], unknowns)
            for p, v in zip(result.grid, result.verdicts)
        ):
            backed.append(locus)
    # keep maximal strata only; among equal ones the first (fewest projector demands) wins
    kept: list[dict] = []
    for i, locus in enumerate(backed):
        p = locus["params"]
        swallowed = any(
            _contains(o["params"], p) and (not _contains(p, o["params"]) or j < i)
            for j, o in enumerate(backed) if j != i
        )
        if not swallowed:
            kept.append(locus)
    for locus in kept:
        eqs = _equations(locus["params"], unknowns)
        for name, v in locus["pi"].items():
            if v == sp.Symbol(name):
                eqs.append(f"{name} arbitrary")
            elif v != 0:
                eqs.append(f"{name} = {v}")
        entry = (namer(locus), eqs)
        if entry not in result.classified_loci:
            result.classified_loci.append(entry)


# general Z2 family -----------------------------------------------------------------------


def label_general_z2(alpha, beta, gamma) -> str:
    a, b, g = (exact.frac(x) for x in (alpha, beta, gamma))
    if a == b == g == 0:
        return "trivial"
    if b == g and (b == a or b == -a):
        return "pcm-wzw"
    if g == 0 and (b == a or b == -a):
        return "new-model"
    if b == g == 0:
        return "constrained-line"
    if a == b == 0:
        return "symmetric-space"
    return "none"


def general_z2_loci(alg: GradedLieAlgebra) -> list[dict]:
    """Integrable strata of the three-constant Z2 family from the symbolic residuals."""
    p0, p1 = sp.symbols("pi0 pi1")
    plus = [ALPHA + BETA, ALPHA + GAMMA]
    minus = [ALPHA - BETA, ALPHA - GAMMA]
    cases = []
    for free0, free1 in itertools.product((False, True), repeat=2):
        pis = [p0 if free0 else 0, p1 if free1 else 0]
        extra = ([BETA] if free0 else []) + ([GAMMA] if free1 else [])
        named = {n: s for n, s, f in (("pi0", p0, free0), ("pi1", p1, free1)) if f}
        cases.append((symbolic_residuals(alg, plus, minus, pis), extra, named))
    return _solve_loci(cases, (ALPHA, BETA, GAMMA))


def _name_z2_locus(locus: dict) -> str:
    # label from a generic point of the locus
    probe = {ALPHA: sp.Integer(7), BETA: sp.Integer(11), GAMMA: sp.Integer(13)}
    free = [s for s in (ALPHA, BETA, GAMMA) if s not in locus["params"]]
    sub = {s: probe[s] for s in free}
    point = [locus["params"].get(s, s).subs(sub) for s in (ALPHA, BETA, GAMMA)]
    return label_general_z2(*(Fraction(int(sp.numer(x)), int(sp.denom(x))) for x in point))


def scan_general_z2(grid: Iterable[Sequence], algebra: GradedLieAlgebra | None = None) -> ScanResult:
    alg = algebra or sl(3, "cyclic", 2)
    if alg.grading_order != 2:
        raise ValueError("the general Z2 family needs a Z2-graded algebra")
    points = [tuple(exact.frac(x) for x in p) for p in grid]
    verdicts = []
    for a, b, g in points:
        report = check(general_z2_pair(alg, a, b, g))
        verdicts.append(_summary(report, label_general_z2(a, b, g)))
    result = ScanResult("general_z2", ("alpha", "beta", "gamma"), points, verdicts)
    _attach_loci(result, general_z2_loci(alg), (ALPHA, BETA, GAMMA), _name_z2_locus)
    return result


# PCM families ------------------------------------------------------------------------------


def label_pcm(alpha, beta) -> str:
    a, b = exact.frac(alpha), exact.frac(beta)
    if a == b == 0:
        return "trivial"
    if a == b or a == -b:
        return "wzw"
    if b == 0:
        return "constrained"
    return "none"


def pcm_loci(alg: GradedLieAlgebra) -> list[dict]:
    p = sp.Symbol("pi")
    plus, minus = [ALPHA + BETA], [ALPHA - BETA]
    cases = [
        (symbolic_residuals(alg, plus, minus, [0]), [], {}),
        (symbolic_residuals(alg, plus, minus, [p]), [BETA], {"pi": p}),
    ]
    return _solve_loci(cases, (ALPHA, BETA))


def _name_pcm_locus(locus: dict) -> str:
    sub = {s: v for s, v in ((ALPHA, sp.Integer(7)), (BETA, sp.Integer(11))) if s not in locus["params"]}
    point = [locus["params"].get(s, s).subs(sub) for s in (ALPHA, BETA)]
    return label_pcm(*(Fraction(int(sp.numer(x)), int(sp.denom(x))) for x in point))


def doubled_pair(alg: GradedLieAlgebra, base_dim: int, alpha, beta) -> ChiralOperatorPair:
    import numpy as np

    eye = exact.identity(base_dim)
    return ChiralOperatorPair.from_matrices(
        alg,
        np.kron(doubled_blocks(alpha, beta, 1), eye),
        np.kron(doubled_blocks(alpha, beta, -1), eye),
    )


def scan_pcm(grid: Iterable[Sequence], family: str = "gauge_fixed") -> ScanResult:
    """Scan the one-copy (``gauge_fixed``) or the ``g + g`` (``doubled``) formulation."""
    points = [tuple(exact.frac(x) for x in p) for p in grid]
    base = sl(2)
    verdicts = []
    notes = []
    if family == "gauge_fixed":
        for a, b in points:
            report = check(from_action(base, [b], [0], a))
            verdicts.append(_summary(report, label_pcm(a, b)))
        result = ScanResult("pcm_gauge_fixed", ("alpha", "beta"), points, verdicts)
        _attach_loci(result, pcm_loci(base), (ALPHA, BETA), _name_pcm_locus)
        return result
    if family != "doubled":
        raise ValueError(f"unknown PCM family {family!r}")
    alg = direct_sum(base)
    kept = []
    for a, b in points:
        if b == 0:
            continue  # the doubled operators need beta != 0
        report = check(doubled_pair(alg, base.dim, a, b))
        kept.append((a, b))
        verdicts.append(_summary(report, "doubled"))
    if len(kept) < len(points):
        notes.append("points with beta = 0 are outside the doubled formulation and were skipped")
    result = ScanResult("pcm_doubled", ("alpha", "beta"), kept, verdicts, notes=notes)
    if kept and all(v["verdict"] != NOT_INTEGRABLE for v in verdicts):
        result.classified_loci.append(("doubled", ["beta != 0"]))
    return result


FAMILIES = {"general_z2": 3, "pcm": 2, "pcm_gauge_fixed": 2, "pcm_doubled": 2}


def scan(family: str, lo=-3, hi=3, step=1) -> ScanResult:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    grid = lattice(lo, hi, step, FAMILIES[family])
    if family == "general_z2":
        return scan_general_z2(grid)
    return scan_pcm(grid, "doubled" if family == "pcm_doubled" else "gauge_fixed")
