"""Multimode Gaussian states in the covariance-matrix representation.

Conventions used throughout the package:

* Quadratures are ``x = a^dag + a`` and ``p = i(a^dag - a)``, so the vacuum
  covariance matrix is the identity and ``[x, p] = 2i``.
* Phase-space vectors are ordered ``(x_1 .. x_m, p_1 .. p_m)``.
* A displacement with complex amplitude ``<a>`` appears in phase space as
  ``(2 Re<a>, 2 Im<a>)``.
* Squeezing strengths quoted in dB map to the variance factor
  ``s = 10**(db / 10)`` and the squeezing parameter ``r = ln(s) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur, solve_triangular, sqrtm

from .errors import NumericDegenerateError, UnphysicalStateError

#: absolute tolerance on symplectic eigenvalues when checking physicality
PHYSICALITY_TOL = 1e-9

#: relative tolerance on covariance symmetry
SYMMETRY_TOL = 1e-12

#: tolerance on the symplectic-form invariant of transforms
SYMPLECTIC_TOL = 1e-10


def symplectic_form(num_modes: int) -> np.ndarray:
    """Return the 2m x 2m symplectic form Omega = [[0, I], [-I, 0]]."""
    eye = np.eye(num_modes)
    zero = np.zeros((num_modes, num_modes))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_eigenvalues(covariance: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a symmetric positive matrix, sorted descending.

    The values are the moduli of the (purely imaginary) eigenvalues of
    ``Omega @ V``; each appears once per mode.
    """
    m = covariance.shape[0] // 2
    ev = np.linalg.eigvals(symplectic_form(m) @ covariance)
    nu = np.sort(np.abs(ev))[::-1]
    return nu[::2].copy()  # pairs (+i nu, -i nu) collapse to one entry


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GaussianState:
    """A Gaussian state: covariance matrix plus displacement vector.

    Attributes:
        covariance: real symmetric 2m x 2m matrix, vacuum-normalized
            (vacuum covariance is the identity).
        displacement: real 2m-vector of quadrature means,
            ``(2 Re<a_i>, 2 Im<a_i>)`` per mode.
    """

    covariance: np.ndarray
    displacement: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        disp = np.asarray(self.displacement, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise UnphysicalStateError(f"covariance must be 2m x 2m, got {cov.shape}")
        if disp.shape != (cov.shape[0],):
            raise UnphysicalStateError(
                f"displacement shape {disp.shape} does not match covariance {cov.shape}"
            )
        scale = max(np.abs(cov).max(), 1.0)
        if np.abs(cov - cov.T).max() > SYMMETRY_TOL * scale:
            raise UnphysicalStateError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        nu_min = symplectic_eigenvalues(cov).min()
        if nu_min < 1.0 - PHYSICALITY_TOL:
            raise UnphysicalStateError(
                f"minimal symplectic eigenvalue {nu_min} violates the vacuum limit"
            )
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0 or (logdet < 0 and np.expm1(logdet) < -PHYSICALITY_TOL):
            raise UnphysicalStateError("det(V) < 1: state below the vacuum limit")
        object.__setattr__(self, "covariance", _as_readonly(cov))
        object.__setattr__(self, "displacement", _as_readonly(disp))

    @property
    def mode_count(self) -> int:
        return self.covariance.shape[0] // 2


@dataclass(frozen=True)
class SymplecticTransform:
    """A linear phase-space transform S with S Omega S^T = Omega."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise ValueError(f"symplectic matrix must be 2m x 2m, got {mat.shape}")
        omega = symplectic_form(mat.shape[0] // 2)
        defect = np.abs(mat @ omega @ mat.T - omega).max()
        if defect > SYMPLECTIC_TOL * max(1.0, np.abs(mat).max() ** 2):
            raise ValueError(f"matrix is not symplectic (defect {defect:.3e})")
        object.__setattr__(self, "matrix", _as_readonly(mat))

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0] // 2


@dataclass(frozen=True)
class ModeSelector:
    """Phase-space basis pair (g_x, g_p) singling out one bosonic mode.

    The pair must be orthonormal with ``g_p = Omega^T g_x`` so that the mode
    quadratures obey the canonical commutator ``[x_g, p_g] = 2i``.
    """

    basis_x: np.ndarray
    basis_p: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.basis_x, dtype=float)
        gp = np.asarray(self.basis_p, dtype=float)
        if gx.ndim != 1 or gx.shape != gp.shape or gx.size % 2:
            raise ValueError("selector vectors must be equal-length 2m vectors")
        m = gx.size // 2
        if abs(np.linalg.norm(gx) - 1.0) > 1e-10 or abs(np.linalg.norm(gp) - 1.0) > 1e-10:
            raise ValueError("selector vectors must be unit norm")
        if abs(gx @ gp) > 1e-10:
            raise ValueError("selector vectors must be orthogonal")
        if np.abs(gp - symplectic_form(m).T @ gx).max() > 1e-10:
            raise ValueError("selector pair must satisfy g_p = Omega^T g_x")
        object.__setattr__(self, "basis_x", _as_readonly(gx))
        object.__setattr__(self, "basis_p", _as_readonly(gp))

    @classmethod
    def for_mode(cls, mode: int, num_modes: int) -> "ModeSelector":
        """Selector for computational mode ``mode`` of an m-mode system."""
        if not 0 <= mode < num_modes:
            raise ValueError(f"mode {mode} out of range for {num_modes} modes")
        gx = np.zeros(2 * num_modes)
        gp = np.zeros(2 * num_modes)
        gx[mode] = 1.0
        gp[num_modes + mode] = 1.0
        return cls(gx, gp)

    @classmethod
    def from_direction(cls, direction: np.ndarray) -> "ModeSelector":
        """Selector for the superposition mode along a phase-space direction."""
        gx = np.asarray(direction, dtype=float)
        gx = gx / np.linalg.norm(gx)
        m = gx.size // 2
        return cls(gx, symplectic_form(m).T @ gx)

    @property
    def matrix(self) -> np.ndarray:
        """The 2m x 2 selector matrix with columns (g_x, g_p)."""
        return np.column_stack([self.basis_x, self.basis_p])


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """Normal-mode factorization V = S diag(n, n) S^T with S symplectic."""

    symplectic: SymplecticTransform
    noise_factors: np.ndarray = field(repr=True)

    def __post_init__(self):
        n = np.asarray(self.noise_factors, dtype=float)
        if np.any(n < 1.0 - PHYSICALITY_TOL):
            raise UnphysicalStateError(f"noise factors below vacuum: {n}")
        if np.any(np.diff(n) > 1e-12):
            raise ValueError("noise factors must be sorted descending")
        object.__setattr__(self, "noise_factors", _as_readonly(n))

    def reconstruct(self) -> np.ndarray:
        s = self.symplectic.matrix
        d = np.concatenate([self.noise_factors, self.noise_factors])
        return (s * d) @ s.T


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def make_vacuum(num_modes: int) -> GaussianState:
    """The m-mode vacuum: identity covariance, zero displacement."""
    if num_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.eye(2 * num_modes), np.zeros(2 * num_modes))


def make_thermal(noise_factors) -> GaussianState:
    """Product of thermal modes with covariance diag(n_1..n_m, n_1..n_m).

    Noise factor 1 is vacuum; a single-mode thermal state with factor n has
    purity 1/n and mean photon number (n - 1) / 2.
    """
    n = np.asarray(noise_factors, dtype=float)
    if n.ndim != 1 or n.size < 1:
        raise ValueError("noise_factors must be a non-empty 1-D sequence")
    if np.any(n < 1.0):
        raise UnphysicalStateError(f"thermal noise factors must be >= 1, got {n}")
    return GaussianState(np.diag(np.concatenate([n, n])), np.zeros(2 * n.size))


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

def db_to_variance_factor(db: float) -> float:
    """dB -> variance factor: s = 10**(db/10), so 10 dB means s = 10."""
    return 10.0 ** (db / 10.0)


def db_to_squeezing_parameter(db: float) -> float:
    """dB -> squeezing parameter r = ln(s)/2 with s = 10**(db/10)."""
    return 0.5 * np.log(db_to_variance_factor(db))


def _check_mode(mode: int, num_modes: int):
    if not 0 <= mode < num_modes:
        raise ValueError(f"mode {mode} out of range for {num_modes} modes")


def _single_mode_block(block: np.ndarray, mode: int, num_modes: int) -> np.ndarray:
    s = np.eye(2 * num_modes)
    j, m = mode, num_modes
    s[j, j], s[j, m + j] = block[0, 0], block[0, 1]
    s[m + j, j], s[m + j, m + j] = block[1, 0], block[1, 1]
    return s


def phase_rotation(theta: float, mode: int, num_modes: int) -> SymplecticTransform:
    """Rotation: x -> cos(theta) x + sin(theta) p, p -> cos(theta) p - sin(theta) x."""
    _check_mode(mode, num_modes)
    block = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    return SymplecticTransform(_single_mode_block(block, mode, num_modes))


def single_mode_squeezer(
    r: float | None = None, *, db: float | None = None, mode: int = 0, num_modes: int = 1
) -> SymplecticTransform:
    """Squeezer acting as x -> sqrt(s) x, p -> p / sqrt(s) with s = exp(2r).

    Exactly one of ``r`` (squeezing parameter) or ``db`` may be given.
    """
    r = _resolve_squeezing(r, db)
    _check_mode(mode, num_modes)
    block = np.diag([np.exp(r), np.exp(-r)])
    return SymplecticTransform(_single_mode_block(block, mode, num_modes))


def _resolve_squeezing(r, db) -> float:
    if (r is None) == (db is None):
        raise ValueError("give exactly one of r or db")
    return float(r) if r is not None else db_to_squeezing_parameter(db)


def two_mode_squeezer(
    r: float | None = None,
    *,
    db: float | None = None,
    mode_a: int,
    mode_b: int,
    num_modes: int,
) -> SymplecticTransform:
    """Two-mode squeezer with +sinh coupling on x-x and -sinh on p-p.

    On a vacuum pair this produces cosh(2r) diagonal blocks and
    +/- sinh(2r) cross blocks; either marginal is thermal with n = cosh(2r).
    The x-x coupling sign is a fixed convention of this package.
    """
    r = _resolve_squeezing(r, db)
    _check_mode(mode_a, num_modes)
    _check_mode(mode_b, num_modes)
    if mode_a == mode_b:
        raise ValueError("two-mode squeezer needs two distinct modes")
    a, b, m = mode_a, mode_b, num_modes
    s = np.eye(2 * num_modes)
    ch, sh = np.cosh(r), np.sinh(r)
    s[a, a] = s[b, b] = ch
    s[a, b] = s[b, a] = sh
    s[m + a, m + a] = s[m + b, m + b] = ch
    s[m + a, m + b] = s[m + b, m + a] = -sh
    return SymplecticTransform(s)


def beamsplitter(
    transmittance: float, mode_a: int, mode_b: int, num_modes: int
) -> SymplecticTransform:
    """Beamsplitter: x_a -> sqrt(t) x_a + sqrt(1-t) x_b (same on p)."""
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {transmittance}")
    _check_mode(mode_a, num_modes)
    _check_mode(mode_b, num_modes)
    if mode_a == mode_b:
        raise ValueError("beamsplitter needs two distinct modes")
    a, b, m = mode_a, mode_b, num_modes
    ct, st = np.sqrt(transmittance), np.sqrt(1.0 - transmittance)
    s = np.eye(2 * num_modes)
    for off in (0, m):
        s[off + a, off + a] = s[off + b, off + b] = ct
        s[off + a, off + b] = st
        s[off + b, off + a] = -st
    return SymplecticTransform(s)


def symplectic_gate(kind: str, params: dict, num_modes: int) -> SymplecticTransform:
    """Build a gate from its serialized description (kind + parameter dict)."""
    if kind == "phase_rotation":
        return phase_rotation(params["theta"], params["mode"], num_modes)
    if kind == "single_mode_squeezer":
        return single_mode_squeezer(
            params.get("r"), db=params.get("db"), mode=params["mode"], num_modes=num_modes
        )
    if kind == "two_mode_squeezer":
        return two_mode_squeezer(
            params.get("r"),
            db=params.get("db"),
            mode_a=params["mode_a"],
            mode_b=params["mode_b"],
            num_modes=num_modes,
        )
    if kind == "beamsplitter":
        return beamsplitter(
            params["transmittance"], params["mode_a"], params["mode_b"], num_modes
        )
    raise ValueError(f"unknown gate kind {kind!r}")


# ---------------------------------------------------------------------------
# state operations
# ---------------------------------------------------------------------------

def apply_symplectic(state: GaussianState, transform: SymplecticTransform) -> GaussianState:
    """V -> S V S^T and displacement -> S displacement. Purity is preserved."""
    s = transform.matrix
    if s.shape[0] != 2 * state.mode_count:
        raise ValueError(
            f"{transform.mode_count}-mode transform applied to "
            f"{state.mode_count}-mode state"
        )
    return GaussianState(s @ state.covariance @ s.T, s @ state.displacement)


def apply_displacement(state: GaussianState, delta) -> GaussianState:
    """Shift the displacement vector by ``delta``; covariance unchanged."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != state.displacement.shape:
        raise ValueError("displacement vector has wrong length")
    return GaussianState(state.covariance, state.displacement + delta)


def reduce_modes(state: GaussianState, modes) -> GaussianState:
    """Marginal state on a subset of modes (partial trace over the rest)."""
    modes = list(modes)
    if not modes:
        raise ValueError("mode subset must be non-empty")
    m = state.mode_count
    for j in modes:
        if not 0 <= j < m:
            raise ValueError(f"mode {j} out of range for {m} modes")
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate mode indices")
    idx = np.array(modes + [m + j for j in modes])
    return GaussianState(
        state.covariance[np.ix_(idx, idx)], state.displacement[idx]
    )


def mean_photon(state: GaussianState, selector: ModeSelector) -> float:
    """Mean photon number of the selected mode: (tr V_g - 2 + |a_g|^2) / 4."""
    g = selector.matrix
    vg = g.T @ state.covariance @ g
    ag = g.T @ state.displacement
    return float((np.trace(vg) - 2.0 + ag @ ag) / 4.0)


def purity_gaussian(state: GaussianState) -> float:
    """Purity of a Gaussian state, 1 / sqrt(det V)."""
    sign, logdet = np.linalg.slogdet(state.covariance)
    if sign <= 0:
        raise UnphysicalStateError("covariance determinant is not positive")
    return float(np.exp(-0.5 * logdet))


def gaussian_wigner_fn(state: GaussianState):
    """Vectorized evaluator for the Gaussian Wigner function.

    Returns a callable mapping an array of shape (..., 2m) to values of
    exp(-(b - a)^T V^-1 (b - a) / 2) / ((2 pi)^m sqrt(det V)).
    """
    cov = state.covariance
    mean = state.displacement
    m = state.mode_count
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or logdet < -690.0:  # det underflows float64
        raise NumericDegenerateError("covariance determinant degenerate")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericDegenerateError("covariance not positive definite") from exc
    log_norm = -(m * np.log(2.0 * np.pi) + 0.5 * logdet)

    def wigner(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        flat = pts.reshape(-1, 2 * m) - mean
        # quadratic form via the Cholesky factor: |L^-1 (b - a)|^2
        z = solve_triangular(chol, flat.T, lower=True, check_finite=False)
        q = np.einsum("ij,ij->j", z, z)
        vals = np.exp(-0.5 * q + log_norm)
        return float(vals[0]) if scalar else vals.reshape(pts.shape[:-1])

    return wigner


def wigner_gaussian_at(state: GaussianState, point) -> float | np.ndarray:
    """Gaussian Wigner function at one phase-space point (or a batch)."""
    return gaussian_wigner_fn(state)(point)


# ---------------------------------------------------------------------------
# normal-mode decomposition
# ---------------------------------------------------------------------------

def williamson(state_or_cov) -> WilliamsonDecomposition:
    """Decompose V = S diag(n_1..n_m, n_1..n_m) S^T with S symplectic.

    Algorithm: real Schur form of the antisymmetric matrix
    ``V^(1/2) Omega V^(1/2)`` whose 2x2 blocks carry the symplectic spectrum.
    The gauge is fixed deterministically: noise factors sorted descending and
    each normal-mode plane oriented so the first significant component of its
    x basis vector is positive.

    Accepts a GaussianState or a bare covariance matrix.
    """
    if isinstance(state_or_cov, GaussianState):
        cov = state_or_cov.covariance
    else:
        cov = np.asarray(state_or_cov, dtype=float)
        if np.abs(cov - cov.T).max() > SYMMETRY_TOL * max(1.0, np.abs(cov).max()):
            raise UnphysicalStateError("covariance matrix is not symmetric")
        if symplectic_eigenvalues(cov).min() < 1.0 - PHYSICALITY_TOL:
            raise UnphysicalStateError("covariance below the vacuum limit")
    n2 = cov.shape[0]
    m = n2 // 2
    root = np.real(sqrtm(cov))
    skew = root @ symplectic_form(m) @ root
    skew = 0.5 * (skew - skew.T)
    t, q = schur(skew, output="real")
    nu = np.empty(m)
    xcols = np.empty((n2, m))
    pcols = np.empty((n2, m))
    for i in range(m):
        b = t[2 * i, 2 * i + 1]
        u, w = q[:, 2 * i], q[:, 2 * i + 1]
        if b < 0:
            u, w, b = w, u, -b
        nu[i] = b
        xcols[:, i] = u
        pcols[:, i] = w
    order = np.argsort(-nu, kind="stable")
    nu = nu[order]
    basis = np.hstack([xcols[:, order], pcols[:, order]])
    scale = np.concatenate([nu, nu])
    s = root @ basis / np.sqrt(scale)
    for i in range(m):
        col = s[:, i]
        lead = np.flatnonzero(np.abs(col) > 1e-9 * np.abs(col).max())[0]
        if col[lead] < 0:
            s[:, i] *= -1.0
            s[:, m + i] *= -1.0
    recon = (s * scale) @ s.T
    err = np.abs(recon - cov).max() / max(1.0, np.abs(cov).max())
    if err > 1e-9:
        raise NumericDegenerateError(f"normal-mode reconstruction failed ({err:.3e})")
    return WilliamsonDecomposition(SymplecticTransform(s), nu)
