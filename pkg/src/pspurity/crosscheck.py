"""Cross-oracle verification: closed form vs moment engine vs grid vs Fock.

Each check returns a CheckResult with the worst deviation observed and the
tolerance it must stay under.  The CLI ``verify`` command prints them; the
test suite asserts them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (
    reduced_purity_fock,
    run_circuit_fock,
    subtract_photon_fock,
)
from .gaussian import ModeSelector, purity_gaussian, reduce_modes
from .quadrature import GridSpec, purity_by_grid, variance_by_grid
from .scenarios import (
    circuit_to_gaussian,
    mode_ratio_table,
    random_state,
    reference_single_mode_state,
    three_mode_circuit,
    topology_search,
)
from .subtraction import (
    extract_bogoliubov,
    moments_subtracted,
    purity_subtracted,
    relative_purity_closed_form,
    subtract_photon,
    subtracted_wigner_fn,
)
from .gaussian import gaussian_wigner_fn


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def line(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: max deviation {self.deviation:.3e}"
            f" (tolerance {self.tolerance:.1e})"
        )


def _single_mode_corpus(count: int, seed0: int = 1000):
    # moderate ranges keep every grid check honest at its tolerance
    for i in range(count):
        yield random_state(1, seed0 + i, n_max=15.0, r_max=1.2, d_max=6.0)


def check_closed_form_vs_moments(count: int = 20) -> CheckResult:
    """Closed-form ratio against the Wick-engine purity, single-mode states."""
    worst = 0.0
    for state in _single_mode_corpus(count):
        sel = ModeSelector.for_mode(0, 1)
        ratio = relative_purity_closed_form(extract_bogoliubov(state, sel))
        mu_sub = purity_subtracted(subtract_photon(state, sel))
        worst = max(worst, abs(ratio * purity_gaussian(state) - mu_sub))
    return CheckResult("closed form vs moment engine", worst, 1e-9)


def check_closed_form_vs_grid(count: int = 20) -> CheckResult:
    """Closed-form ratio against grid-integrated purities."""
    worst = 0.0
    for state in _single_mode_corpus(count):
        sel = ModeSelector.for_mode(0, 1)
        ratio = relative_purity_closed_form(extract_bogoliubov(state, sel))
        sub = subtract_photon(state, sel)
        mu_grid, _ = purity_by_grid(
            gaussian_wigner_fn(state), 1, GridSpec.for_state(state)
        )
        mu_sub_grid, _ = purity_by_grid(
            subtracted_wigner_fn(sub), 1, GridSpec.for_subtracted(sub)
        )
        worst = max(worst, abs(ratio - mu_sub_grid / mu_grid))
    return CheckResult("closed form vs grid quadrature", worst, 1e-4)


def check_three_mode_fock() -> CheckResult:
    """Per-mode ratio table of the matched topology: analytic vs Fock."""
    topology, analytic = topology_search()
    if topology is None:
        return CheckResult("three-mode table vs number basis", np.inf, 1e-3)
    circuit = three_mode_circuit(topology)
    fock = run_circuit_fock(circuit)
    worst = 0.0
    before = [reduced_purity_fock(fock, [j]) for j in range(3)]
    for g in range(3):
        sub = subtract_photon_fock(fock, g)
        for j in range(3):
            fock_ratio = reduced_purity_fock(sub, [j]) / before[j]
            worst = max(worst, abs(fock_ratio - analytic[g, j]))
    return CheckResult("three-mode table vs number basis", worst, 1e-3)


def check_three_mode_global_purity() -> CheckResult:
    """Global purity must survive subtraction on the pure three-mode state."""
    state = circuit_to_gaussian(three_mode_circuit())
    worst = 0.0
    for g in range(3):
        mu = purity_subtracted(subtract_photon(state, ModeSelector.for_mode(g, 3)))
        worst = max(worst, abs(mu - 1.0))
    return CheckResult("global purity preserved", worst, 1e-7)


def check_reference_state() -> CheckResult:
    """Showcase configuration: ratio 1.1967, variance suppression 0.85."""
    state = reference_single_mode_state()
    sel = ModeSelector.for_mode(0, 1)
    ratio = relative_purity_closed_form(extract_bogoliubov(state, sel))
    sub = subtract_photon(state, sel)
    report = moments_subtracted(sub)
    dev = max(
        abs(ratio - 1.1967) / 5e-4,
        abs(report.covariance[0, 0] / state.covariance[0, 0] - 0.85) / 0.01,
        abs(report.covariance[1, 1] / state.covariance[1, 1] - 1.0) / 1e-9,
    )
    return CheckResult("reference-state values (scaled)", dev, 1.0)


def check_reference_variances_by_grid() -> CheckResult:
    """Grid-route variance ratios for the showcase configuration."""
    state = reference_single_mode_state()
    sub = subtract_photon(state, ModeSelector.for_mode(0, 1))
    grid = GridSpec.for_subtracted(sub)
    wig = subtracted_wigner_fn(sub)
    var_q = variance_by_grid(wig, 0, "x", 1, grid)
    var_p = variance_by_grid(wig, 0, "p", 1, grid)
    dev = max(
        abs(var_q / state.covariance[0, 0] - 0.85) / 0.01,
        abs(var_p / state.covariance[1, 1] - 1.0) / 1e-4,
    )
    return CheckResult("reference-state variances by grid (scaled)", dev, 1.0)


def verify_all(fast: bool = False) -> list[CheckResult]:
    """The full cross-oracle suite (used by the CLI)."""
    checks = [
        check_reference_state(),
        check_closed_form_vs_moments(),
        check_closed_form_vs_grid(5 if fast else 20),
        check_reference_variances_by_grid(),
        check_three_mode_global_purity(),
        check_three_mode_fock(),
    ]
    return checks
