"""
catrepeater/tools/verification.py
=================================

Self-consistency suite behind ``catrepeater verify``.

Every check compares two independent routes to the same number (a closed
form against the Fock-space oracle, or an identity that must hold
exactly) and reports the worst deviation over its grid.  The suite passes
when every deviation is within its tolerance.

``perturb_series`` scales the even series coefficients ``C_m`` by
``(1 + perturb_series)^m`` before they enter the closed-form checks.  Any
non-zero value must make those checks fail.
"""

import logging
import math
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, List, Tuple

import numpy as np

from ..core.cat_codes import (
    CatCode,
    codeword,
    codeword_overlap,
    damped_usd_closed_form,
    overlap_closed_form,
    series_coefficients,
    syndrome_class_probability,
    syndrome_probability_closed_form,
    usd_probability,
)
from ..core.fock import DEFAULT_K_MAX, apply_loss_unraveled, completeness_defect, kraus_family, truncation_cutoff
from ..core.graph_states import equivalence_check
from ..core.link_model import LinkParams, f0_from_series, link_oracle
from ..core.rate_model import qber_dephasing, qber_depolarizing, swapped_fidelity

logger = logging.getLogger(__name__)

ALPHAS = (0.6, 1.0, 1.4)
ETAS = (0.3, 0.5, 0.7, 0.9)
LOSS_ORDERS = (1, 3)
GRAPH_POINTS = tuple(product((0.8, 1.2), (0.6, 0.9)))

IDENTITY_TOLERANCE = 1e-10
CLOSED_FORM_TOLERANCE = 1e-8
QBER_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.deviation) and self.deviation <= self.tolerance

    def as_row(self) -> dict:
        return {
            "check": self.name,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "status": "pass" if self.passed else "FAIL",
            "detail": self.detail,
        }


def _worst(values: List[Tuple[float, str]]) -> Tuple[float, str]:
    deviation, where = max(values, key=lambda item: item[0])
    return float(deviation), where


# ── Checks ────────────────────────────────────────────────────────────────────


def check_kraus_completeness() -> CheckResult:
    values = []
    for alpha, eta, loss_order in product(ALPHAS, ETAS, LOSS_ORDERS):
        cutoff = CatCode(alpha, loss_order).cutoff()
        values.append((completeness_defect(kraus_family(eta, cutoff)), f"alpha={alpha} eta={eta} cutoff={cutoff}"))
    deviation, where = _worst(values)
    return CheckResult("kraus_completeness", deviation, IDENTITY_TOLERANCE, where)


def check_trajectory_normalization(k_max: int = DEFAULT_K_MAX) -> CheckResult:
    values = []
    for alpha, eta, loss_order in product(ALPHAS, ETAS, LOSS_ORDERS):
        code = CatCode(alpha, loss_order)
        ensemble = apply_loss_unraveled(codeword(code, 0), 0, eta, k_max)
        values.append((abs(ensemble.total_weight - 1.0), f"alpha={alpha} eta={eta} loss_order={loss_order}"))
    deviation, where = _worst(values)
    return CheckResult("trajectory_normalization", deviation, IDENTITY_TOLERANCE, where)


def check_residue_partition(k_max: int = DEFAULT_K_MAX) -> CheckResult:
    values = []
    for alpha, eta, loss_order in product(ALPHAS, ETAS, LOSS_ORDERS):
        code = CatCode(alpha, loss_order)
        total = sum(syndrome_class_probability(code, eta, j, k_max=k_max) for j in range(code.modulus))
        values.append((abs(total - 1.0), f"alpha={alpha} eta={eta} loss_order={loss_order}"))
    deviation, where = _worst(values)
    return CheckResult("residue_partition", deviation, IDENTITY_TOLERANCE, where)


def check_syndrome_closed_form(k_max: int = DEFAULT_K_MAX) -> CheckResult:
    values = []
    for alpha, eta in product(ALPHAS, ETAS):
        code = CatCode(alpha, 1)
        for residue in (0, 1):
            oracle = syndrome_class_probability(code, eta, residue, k_max=k_max)
            closed = syndrome_probability_closed_form(alpha, eta, residue)
            values.append((abs(oracle - closed), f"alpha={alpha} eta={eta} residue={residue}"))
    deviation, where = _worst(values)
    return CheckResult("syndrome_closed_form", deviation, CLOSED_FORM_TOLERANCE, where)


def _series(alpha: float, eta: float, perturb_series: float):
    series = series_coefficients(alpha, eta)
    if perturb_series:
        scaled = tuple(c * (1.0 + perturb_series) ** m for m, c in enumerate(series.C))
        series = replace(series, C=scaled)
    return series


def check_series_identity(perturb_series: float = 0.0) -> CheckResult:
    """Squared series coefficients must sum to one."""
    values = []
    for alpha, eta in product(ALPHAS, ETAS):
        total = _series(alpha, eta, perturb_series).total()
        values.append((abs(total - 1.0), f"alpha={alpha} eta={eta}"))
    deviation, where = _worst(values)
    return CheckResult("series_identity", deviation, IDENTITY_TOLERANCE, where)


def check_f0_closed_form(perturb_series: float = 0.0, k_max: int = DEFAULT_K_MAX) -> CheckResult:
    values = []
    for alpha, eta in product(ALPHAS, ETAS):
        cutoff = truncation_cutoff(alpha, headroom=0)
        oracle = link_oracle(LinkParams(alpha, 1, transmittance=eta), cutoff=cutoff, k_max=k_max)
        series = _series(alpha, eta, perturb_series)
        for pair, row in oracle.outcomes.items():
            if not row.reachable or math.isnan(row.fidelity):
                continue
            values.append((abs(row.fidelity - f0_from_series(series, pair)), f"alpha={alpha} eta={eta} pair={pair}"))
    deviation, where = _worst(values)
    return CheckResult("f0_closed_form", deviation, CLOSED_FORM_TOLERANCE, where)


def check_usd_pattern() -> CheckResult:
    values = []
    for alpha in np.linspace(0.2, 2.0, 21):
        code = CatCode(float(alpha), 1)
        expected = 1.0 - abs(overlap_closed_form(float(alpha)))
        values.append((abs(usd_probability(code) - expected), f"alpha={alpha:.2f}"))
    zero = CatCode(math.sqrt(math.pi / 2.0), 1)
    values.append((abs(codeword_overlap(zero)), "overlap at alpha^2=pi/2"))
    deviation, where = _worst(values)
    return CheckResult("usd_pattern", deviation, IDENTITY_TOLERANCE, where)


def check_damped_usd_closed_form() -> CheckResult:
    values = []
    for alpha, eta in product(ALPHAS, ETAS):
        code = CatCode(alpha, 1)
        for residue in (0, 1):
            oracle = usd_probability(code, eta, residue)
            closed = damped_usd_closed_form(alpha, eta, residue)
            values.append((abs(oracle - closed), f"alpha={alpha} eta={eta} residue={residue}"))
    deviation, where = _worst(values)
    return CheckResult("damped_usd_closed_form", deviation, IDENTITY_TOLERANCE, where)


def check_qber() -> CheckResult:
    values = []
    e_x, e_z = qber_depolarizing(0.9, 2, 0.1)
    values.append((max(abs(e_x - 0.2408), abs(e_z - 0.095)), "depolarizing F0=0.9 n=2 p=0.1"))
    e_x, e_z = qber_dephasing(0.9, 2, 0.1)
    values.append((max(abs(e_x - 0.2952), abs(e_z)), "dephasing F0=0.9 n=2 p=0.1"))
    for f0, n in product((0.6, 0.9, 0.99), (1, 5, 40)):
        reference = (1.0 - swapped_fidelity(f0, n), 0.0)
        for model in (qber_depolarizing, qber_dephasing):
            got = model(f0, n, 0.0)
            values.append((max(abs(got[0] - reference[0]), abs(got[1] - reference[1])), f"{model.__name__} p=0"))
    deviation, where = _worst(values)
    return CheckResult("qber", deviation, QBER_TOLERANCE, where)


def check_graph_equivalence(k_max: int = DEFAULT_K_MAX) -> CheckResult:
    values = []
    for alpha, eta in GRAPH_POINTS:
        report = equivalence_check(alpha, eta, k_max=k_max)
        values.append((report.max_deviation, f"alpha={alpha} eta={eta} branches={report.branches}"))
    deviation, where = _worst(values)
    return CheckResult("graph_equivalence", deviation, CLOSED_FORM_TOLERANCE, where)


def run_verification(
    perturb_series: float = 0.0,
    include_graph: bool = True,
    k_max: int = DEFAULT_K_MAX,
) -> List[CheckResult]:
    """Run every check in order and log a line per result.

    ``k_max`` is the initial Kraus depth of every unravelling the checks run.
    """
    checks: List[Callable[[], CheckResult]] = [
        check_kraus_completeness,
        lambda: check_trajectory_normalization(k_max),
        lambda: check_residue_partition(k_max),
        lambda: check_syndrome_closed_form(k_max),
        lambda: check_series_identity(perturb_series),
        lambda: check_f0_closed_form(perturb_series, k_max),
        check_usd_pattern,
        check_damped_usd_closed_form,
        check_qber,
    ]
    if include_graph:
        checks.append(lambda: check_graph_equivalence(k_max))

    results = []
    for check in checks:
        result = check()
        logger.info("%s: deviation %.3e (tolerance %.1e) %s", result.name, result.deviation, result.tolerance,
                    "pass" if result.passed else "FAIL")
        results.append(result)
    return results
