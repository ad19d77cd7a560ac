"""
Dense conic kernel: one Hermitian PSD block plus nonnegative scalars.

Programs are written over a complex Hermitian n x n matrix Psi and a vector
s of nonnegative scalars:

    min/max  tr(C Psi) + c . s
    s.t.     tr(A_k Psi) + a_k . s  {<=, >=, ==}  b_k,   Psi >= 0, s >= 0

The Hermitian block is solved through its real symmetric embedding
W = [[Re Psi, -Im Psi], [Im Psi, Re Psi]], with every coefficient halved so
that tr(A Psi) = tr(embed(A) W). Inequalities get slack columns and the
whole thing goes to an infeasible-start primal-dual interior point method
(HKM direction, Mehrotra predictor-corrector). When that run does not
converge, a phase-1 program decides feasibility and, if the program is
infeasible, returns a Farkas ray as certificate.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg

from .config import Config
from .logger import get_logger

logger = get_logger(__name__)

DIVERGENCE_LIMIT = 1e12
MIN_STEP = 1e-8
TIE_TOL = 1e-12
ACCEPT_RESIDUAL = 1e-5


class ConeProgramError(ValueError):
    """Malformed program (dimensions, non-Hermitian data, size limits)."""


class KernelError(RuntimeError):
    """The kernel could not certify a program the caller needs solved."""


class Sense(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class ConeStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class LinearConstraint:
    A: Optional[np.ndarray]
    a: np.ndarray
    sense: Sense
    b: float


@dataclass
class ConeProgram:
    """Builder for a small dense conic program (see module docstring)."""

    psd_dim: int
    n_scalars: int
    C: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    maximize: bool = False
    constraints: list = field(default_factory=list)

    def add_constraint(self, A=None, a=None, sense=Sense.GE, b=0.0) -> "ConeProgram":
        a = np.zeros(self.n_scalars) if a is None else np.asarray(a, dtype=float)
        self.constraints.append(
            LinearConstraint(
                A=None if A is None else np.asarray(A, dtype=complex),
                a=a.reshape(-1),
                sense=Sense(sense),
                b=float(b),
            )
        )
        return self

    @property
    def objective_matrix(self) -> np.ndarray:
        if self.C is None:
            return np.zeros((self.psd_dim, self.psd_dim), dtype=complex)
        return np.asarray(self.C, dtype=complex)

    @property
    def objective_vector(self) -> np.ndarray:
        if self.c is None:
            return np.zeros(self.n_scalars)
        return np.asarray(self.c, dtype=float).reshape(-1)

    def constraint_matrix(self, k: int) -> np.ndarray:
        A = self.constraints[k].A
        if A is None:
            return np.zeros((self.psd_dim, self.psd_dim), dtype=complex)
        return A

    def validate(self) -> list[str]:
        """Return the list of structural problems (empty if well formed)."""
        issues = []
        n, l = self.psd_dim, self.n_scalars
        if n < 0 or l < 0:
            return ["psd_dim and n_scalars must be nonnegative"]
        if n > Config.max_psd_dim:
            issues.append(f"psd_dim {n} exceeds the limit of {Config.max_psd_dim}")
        if len(self.constraints) > Config.max_constraints:
            issues.append(
                f"{len(self.constraints)} constraints exceed the limit of "
                f"{Config.max_constraints}"
            )

        def check_matrix(H, name):
            if H is None:
                return
            H = np.asarray(H)
            if H.shape != (n, n):
                issues.append(f"{name} must be {n}x{n}, got {H.shape}")
                return
            if not np.all(np.isfinite(H)):
                issues.append(f"{name} must be finite")
                return
            if n and np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
                issues.append(f"{name} is not Hermitian")

        def check_vector(v, name):
            if v is None:
                return
            v = np.asarray(v).reshape(-1)
            if v.shape[0] != l:
                issues.append(f"{name} must have {l} entries, got {v.shape[0]}")
            elif not np.all(np.isfinite(v)):
                issues.append(f"{name} must be finite")

        check_matrix(self.C, "C")
        check_vector(self.c, "c")
        for k, con in enumerate(self.constraints):
            check_matrix(con.A, f"A[{k}]")
            check_vector(con.a, f"a[{k}]")
            if not math.isfinite(con.b):
                issues.append(f"b[{k}] must be finite")
        return issues


@dataclass(frozen=True)
class KktResiduals:
    primal_feas: float
    dual_feas: float
    duality_gap: float

    def worst(self) -> float:
        return max(self.primal_feas, self.dual_feas, self.duality_gap)


@dataclass(frozen=True)
class ConeSolution:
    """
    Kernel result.

    For OPTIMAL, ``dual`` holds one multiplier per constraint and
    ``dual_bound`` the matching bound on the objective. For INFEASIBLE,
    ``certificate`` is a ray y with sum y_k A_k <= 0, sum y_k a_k <= 0,
    y_k >= 0 on >= rows, y_k <= 0 on <= rows and b . y > 0.
    """

    status: ConeStatus
    psd_matrix: np.ndarray
    scalars: np.ndarray
    objective_value: float
    kkt_residuals: KktResiduals
    iterations: int = 0
    dual: Optional[np.ndarray] = None
    dual_bound: Optional[float] = None
    certificate: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is ConeStatus.OPTIMAL


def embed_hermitian(H: np.ndarray) -> np.ndarray:
    """Real symmetric 2n x 2n image of a Hermitian matrix, halved."""
    return 0.5 * np.block([[H.real, -H.imag], [H.imag, H.real]])


def extract_hermitian(W: np.ndarray) -> np.ndarray:
    """Hermitian n x n matrix represented by a real 2n x 2n block (inverse of the embedding)."""
    n = W.shape[0] // 2
    W11, W12 = W[:n, :n], W[:n, n:]
    W21, W22 = W[n:, :n], W[n:, n:]
    H = 0.5 * (W11 + W22) + 0.5j * (W21 - W12)
    return 0.5 * (H + H.conj().T)


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass
class _StandardForm:
    A: np.ndarray  # (m, d, d) real symmetric
    a: np.ndarray  # (m, l)
    b: np.ndarray
    C: np.ndarray
    c: np.ndarray
    row_scale: np.ndarray
    rows: list  # original constraint index of each kept row
    obj_scale: float = 1.0

    @property
    def m(self):
        return self.b.shape[0]

    @property
    def d(self):
        return self.C.shape[0]

    @property
    def l(self):
        return self.c.shape[0]

    def Amap(self, X, x):
        return np.einsum("kij,ij->k", self.A, X) + self.a @ x

    def Aadj(self, y):
        return np.einsum("k,kij->ij", y, self.A), self.a.T @ y


@dataclass
class _IpmResult:
    converged: bool
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    pcost: float
    dcost: float
    residuals: KktResiduals
    iterations: int
    reason: str


def _zero_row_verdict(con: LinearConstraint, tol: float) -> Optional[float]:
    """None if an all-zero row holds, else the sign of its Farkas multiplier."""
    b = con.b
    if con.sense is Sense.GE:
        return None if b <= tol else 1.0
    if con.sense is Sense.LE:
        return None if b >= -tol else -1.0
    return None if abs(b) <= tol else math.copysign(1.0, b)


def _standard_form(prog: ConeProgram, keep: list) -> _StandardForm:
    n, l0 = prog.psd_dim, prog.n_scalars
    d = 2 * n
    slack_rows = [k for k in keep if prog.constraints[k].sense is not Sense.EQ]
    l = l0 + len(slack_rows)
    m = len(keep)

    A = np.zeros((m, d, d))
    a = np.zeros((m, l))
    b = np.zeros(m)
    for row, k in enumerate(keep):
        con = prog.constraints[k]
        if con.A is not None and n:
            A[row] = embed_hermitian(con.A)
        a[row, :l0] = con.a
        b[row] = con.b
        if con.sense is not Sense.EQ:
            col = l0 + slack_rows.index(k)
            a[row, col] = -1.0 if con.sense is Sense.GE else 1.0

    scale = np.sqrt(np.einsum("kij,kij->k", A, A) + np.sum(a * a, axis=1))
    A /= scale[:, None, None]
    a /= scale[:, None]
    b /= scale

    C = embed_hermitian(prog.objective_matrix) if n else np.zeros((0, 0))
    c = np.concatenate([prog.objective_vector, np.zeros(l - l0)])
    if prog.maximize:
        C, c = -C, -c
    obj_norm = math.sqrt(float(np.sum(C * C) + c @ c))
    obj_scale = obj_norm if obj_norm > 0 else 1.0
    return _StandardForm(A, a, b, C / obj_scale, c / obj_scale, scale, list(keep), obj_scale)


def _phase_one(sf: _StandardForm) -> _StandardForm:
    """min sum(u + v) s.t. A(X) + a x + u - v = b; optimum 0 iff feasible."""
    m, l = sf.m, sf.l
    eye = np.eye(m)
    a = np.hstack([sf.a, eye, -eye])
    c = np.concatenate([np.zeros(l), np.ones(2 * m)])
    return _StandardForm(
        sf.A, a, sf.b.copy(), np.zeros_like(sf.C), c, sf.row_scale, sf.rows
    )


def _max_step_psd(X, dX):
    if X.size == 0:
        return math.inf
    try:
        L = linalg.cholesky(X, lower=True)
    except linalg.LinAlgError:
        return 0.0
    W = linalg.solve_triangular(L, dX, lower=True)
    W = linalg.solve_triangular(L, W.T, lower=True)
    lam = linalg.eigvalsh(_sym(W))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def _interior_point(sf: _StandardForm, tol, max_iters, step_fraction) -> _IpmResult:
    m, d, l = sf.m, sf.d, sf.l
    n_cone = d + l
    b_norm = float(np.linalg.norm(sf.b))
    c_norm = math.sqrt(float(np.sum(sf.C * sf.C) + sf.c @ sf.c))

    # Starting point scaled to the data
    row_norms = np.sqrt(np.einsum("kij,kij->k", sf.A, sf.A) + np.sum(sf.a * sf.a, axis=1))
    xi = max(10.0, math.sqrt(n_cone))
    eta = max(10.0, math.sqrt(n_cone), c_norm)
    if m:
        xi = max(xi, n_cone * float(np.max((1.0 + np.abs(sf.b)) / (1.0 + row_norms))))
        eta = max(eta, float(np.max(row_norms)))
    X, Z = xi * np.eye(d), eta * np.eye(d)
    x, z = xi * np.ones(l), eta * np.ones(l)
    y = np.zeros(m)

    def measures():
        Rp = sf.b - sf.Amap(X, x)
        AtyS, Atyv = sf.Aadj(y)
        Rd = sf.C - AtyS - Z
        rd = sf.c - Atyv - z
        pcost = float(np.sum(sf.C * X) + sf.c @ x)
        dcost = float(sf.b @ y)
        res = KktResiduals(
            primal_feas=float(np.linalg.norm(Rp)) / (1.0 + b_norm),
            dual_feas=math.sqrt(float(np.sum(Rd * Rd) + rd @ rd)) / (1.0 + c_norm),
            duality_gap=abs(pcost - dcost) / (1.0 + abs(pcost) + abs(dcost)),
        )
        return Rp, Rd, rd, pcost, dcost, res

    reason = "max_iter"
    converged = False
    it = 0
    for it in range(max_iters + 1):
        Rp, Rd, rd, pcost, dcost, res = measures()
        if res.worst() <= tol:
            converged = True
            reason = "optimal"
            break
        if it == max_iters:
            break
        size = max(
            np.max(np.abs(X), initial=0.0),
            np.max(np.abs(Z), initial=0.0),
            np.max(np.abs(x), initial=0.0),
            np.max(np.abs(z), initial=0.0),
            np.max(np.abs(y), initial=0.0),
        )
        if size > DIVERGENCE_LIMIT:
            reason = "diverged"
            break

        mu = (float(np.sum(X * Z)) + float(x @ z)) / n_cone
        try:
            Zinv = linalg.cho_solve(linalg.cho_factor(Z), np.eye(d)) if d else Z
        except linalg.LinAlgError:
            reason = "numerical"
            break
        Zinv = _sym(Zinv)
        xz = x / z

        # Schur complement M_kl = tr(A_k X A_l Z^-1) + a_k diag(x/z) a_l
        T = X @ sf.A @ Zinv
        M = np.einsum("kij,lji->kl", sf.A, T) + (sf.a * xz) @ sf.a.T
        M = _sym(M)
        solve_m = None
        if m:
            try:
                factor = linalg.cho_factor(M)
                solve_m = lambda h: linalg.cho_solve(factor, h)  # noqa: E731
            except linalg.LinAlgError:
                solve_m = lambda h: linalg.lstsq(M, h)[0]  # noqa: E731

        XRdZ = X @ Rd @ Zinv

        def direction(G, g):
            h = Rp - np.einsum("kij,ij->k", sf.A, G - XRdZ) - sf.a @ (g - xz * rd)
            dy = solve_m(h) if m else np.zeros(0)
            AtdyS, Atdyv = sf.Aadj(dy)
            dZ = Rd - AtdyS
            dX = G - _sym(X @ dZ @ Zinv)
            dz = rd - Atdyv
            dx = g - xz * dz
            return dX, dx, dy, dZ, dz

        def steps(dX, dx, dZ, dz):
            ap = min(_max_step_psd(X, dX), _max_step_lp(x, dx))
            ad = min(_max_step_psd(Z, dZ), _max_step_lp(z, dz))
            return ap, ad

        # Predictor
        dXa, dxa, _, dZa, dza = direction(-X, -x)
        ap, ad = steps(dXa, dxa, dZa, dza)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (
            float(np.sum((X + ap * dXa) * (Z + ad * dZa)))
            + float((x + ap * dxa) @ (z + ad * dza))
        ) / n_cone
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # Corrector
        G = sigma * mu * Zinv - X - _sym(dXa @ dZa @ Zinv)
        g = (sigma * mu - dxa * dza) / z - x
        dX, dx, dy, dZ, dz = direction(G, g)
        ap, ad = steps(dX, dx, dZ, dz)
        ap = min(1.0, step_fraction * ap)
        ad = min(1.0, step_fraction * ad)
        if ap < MIN_STEP and ad < MIN_STEP:
            reason = "stalled"
            break

        X = _sym(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)
        z = z + ad * dz

    return _IpmResult(converged, X, x, y, pcost, dcost, res, it, reason)


def _empty_solution(prog, status, residuals=None, certificate=None, iterations=0):
    n = prog.psd_dim
    return ConeSolution(
        status=status,
        psd_matrix=np.zeros((n, n), dtype=complex),
        scalars=np.zeros(prog.n_scalars),
        objective_value=0.0,
        kkt_residuals=residuals or KktResiduals(0.0, 0.0, 0.0),
        iterations=iterations,
        certificate=certificate,
    )


def _objective(prog: ConeProgram, Psi, s) -> float:
    value = float(np.trace(prog.objective_matrix @ Psi).real) if prog.psd_dim else 0.0
    return value + float(prog.objective_vector @ s)


def solve(
    prog: ConeProgram,
    tol: float = Config.sdp_tol,
    max_iters: int = Config.kernel_max_iters,
) -> ConeSolution:
    """
    Solve a cone program to relative KKT accuracy ``tol``.

    Returns OPTIMAL with residuals <= tol, INFEASIBLE with a Farkas
    certificate, or MAX_ITER when neither could be established.

    Raises:
        ConeProgramError: if the program is malformed.
    """
    issues = prog.validate()
    if issues:
        raise ConeProgramError("; ".join(issues))

    n_cons = len(prog.constraints)
    keep = []
    for k, con in enumerate(prog.constraints):
        A_zero = con.A is None or not np.any(con.A)
        if A_zero and not np.any(con.a):
            sign = _zero_row_verdict(con, tol)
            if sign is not None:
                certificate = np.zeros(n_cons)
                certificate[k] = sign
                logger.debug(f"Constraint {k} has no variables and cannot hold")
                return _empty_solution(prog, ConeStatus.INFEASIBLE, certificate=certificate)
            continue
        keep.append(k)

    sf = _standard_form(prog, keep)
    if sf.d + sf.l == 0:
        return _empty_solution(prog, ConeStatus.OPTIMAL)

    step_fraction = Config.kernel_step_fraction
    result = _interior_point(sf, tol, max_iters, step_fraction)
    logger.debug(
        f"Cone solve ({prog.psd_dim}x{prog.psd_dim}, {len(keep)} rows): "
        f"{result.reason} after {result.iterations} iterations"
    )

    if result.converged:
        Psi = extract_hermitian(result.X) if prog.psd_dim else np.zeros((0, 0), dtype=complex)
        scalars = np.maximum(result.x[: prog.n_scalars], 0.0)
        sign = -1.0 if prog.maximize else 1.0
        dual = np.zeros(n_cons)
        dual[keep] = result.y * sf.obj_scale / sf.row_scale
        pcost = result.pcost * sf.obj_scale
        dcost = result.dcost * sf.obj_scale
        gap_tol = tol * (1.0 + abs(pcost) + abs(dcost))
        if pcost < dcost - gap_tol:
            raise KernelError(
                f"weak duality violated: primal {pcost:.3e} < dual {dcost:.3e}"
            )
        return ConeSolution(
            status=ConeStatus.OPTIMAL,
            psd_matrix=Psi,
            scalars=scalars,
            objective_value=_objective(prog, Psi, scalars),
            kkt_residuals=result.residuals,
            iterations=result.iterations,
            dual=sign * dual,
            dual_bound=sign * dcost,
        )

    # Phase 1: is there any feasible point at all?
    p1 = _interior_point(_phase_one(sf), tol, max_iters, step_fraction)
    feas_tol = max(10.0 * tol, 1e-9) * (1.0 + float(np.linalg.norm(sf.b)))
    if p1.converged and p1.pcost > feas_tol:
        certificate = np.zeros(n_cons)
        certificate[keep] = p1.y / sf.row_scale
        logger.debug(f"Program infeasible, phase-1 violation {p1.pcost:.3e}")
        return _empty_solution(
            prog,
            ConeStatus.INFEASIBLE,
            residuals=p1.residuals,
            certificate=certificate,
            iterations=result.iterations + p1.iterations,
        )

    logger.debug(
        f"Program not certified ({result.reason}); phase-1 violation "
        f"{p1.pcost:.3e}, residuals {result.residuals}"
    )
    Psi = extract_hermitian(result.X) if prog.psd_dim else np.zeros((0, 0), dtype=complex)
    scalars = np.maximum(result.x[: prog.n_scalars], 0.0)
    return ConeSolution(
        status=ConeStatus.MAX_ITER,
        psd_matrix=Psi,
        scalars=scalars,
        objective_value=_objective(prog, Psi, scalars),
        kkt_residuals=result.residuals,
        iterations=result.iterations + p1.iterations,
    )


def solve_certified(
    prog: ConeProgram,
    tol: float = Config.sdp_tol,
    context: str = "cone program",
    allow_infeasible: bool = False,
) -> ConeSolution:
    """
    Solve and insist on a usable answer.

    A MAX_ITER result whose residuals are still within ``ACCEPT_RESIDUAL``
    is accepted with a warning.

    Raises:
        KernelError: if the program was not solved (or was infeasible and
            ``allow_infeasible`` is False).
    """
    sol = solve(prog, tol=tol)
    if sol.status is ConeStatus.OPTIMAL:
        return sol
    if sol.status is ConeStatus.INFEASIBLE and allow_infeasible:
        return sol
    if sol.status is ConeStatus.MAX_ITER and sol.kkt_residuals.worst() <= ACCEPT_RESIDUAL:
        logger.warning(
            f"{context}: kernel stopped at residual {sol.kkt_residuals.worst():.2e}, "
            f"accepting near-optimal point"
        )
        return sol
    raise KernelError(
        f"{context}: kernel returned {sol.status.value} after {sol.iterations} "
        f"iterations (primal {sol.kkt_residuals.primal_feas:.2e}, "
        f"dual {sol.kkt_residuals.dual_feas:.2e}, gap {sol.kkt_residuals.duality_gap:.2e})"
    )


def certificate_is_valid(prog: ConeProgram, y: np.ndarray, tol: float = 1e-7) -> bool:
    """Check that y proves the program infeasible (see ConeSolution)."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] != len(prog.constraints):
        return False
    scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
    for yk, con in zip(y, prog.constraints):
        if con.sense is Sense.GE and yk < -tol * scale:
            return False
        if con.sense is Sense.LE and yk > tol * scale:
            return False
    b_dot = sum(yk * con.b for yk, con in zip(y, prog.constraints))
    if b_dot <= tol * scale:
        return False
    if prog.n_scalars:
        a_sum = sum(yk * con.a for yk, con in zip(y, prog.constraints))
        if np.any(a_sum > tol * scale):
            return False
    if prog.psd_dim:
        A_sum = sum(yk * prog.constraint_matrix(k) for k, yk in enumerate(y))
        if linalg.eigvalsh(0.5 * (A_sum + A_sum.conj().T))[-1] > tol * scale:
            return False
    return True


def principal_direction(H: np.ndarray) -> tuple[np.ndarray, float, float]:
    """
    Top eigenvector of a Hermitian PSD matrix.

    Returns (u, lambda1, defect) with defect = lambda2 / lambda1. The vector
    is deterministic: on eigenvalue ties the eigenspace member closest to
    the lowest-index basis vector is taken, and the first nonzero component
    is made real and positive. The zero matrix gives (0, 0.0, 0.0).

    Raises:
        ValueError: if H is not square Hermitian.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    n = H.shape[0]
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
    if n and np.max(np.abs(H - H.conj().T)) > 1e-9 * scale:
        raise ValueError("matrix is not Hermitian")
    if n == 0:
        return np.zeros(0, dtype=complex), 0.0, 0.0

    w, V = linalg.eigh(0.5 * (H + H.conj().T))
    lam1 = float(w[-1])
    if lam1 <= 0.0:
        return np.zeros(n, dtype=complex), 0.0, 0.0

    top = V[:, w >= lam1 - TIE_TOL * max(1.0, lam1)]
    if top.shape[1] == 1:
        u = top[:, 0]
    else:
        projector = top @ top.conj().T
        u = top[:, -1]
        for k in range(n):
            candidate = projector[:, k]
            norm = np.linalg.norm(candidate)
            if norm > 1e-8:
                u = candidate / norm
                break

    lead = np.flatnonzero(np.abs(u) > 1e-12)
    if lead.size:
        first = u[lead[0]]
        u = u * (np.conj(first) / abs(first))
    u = u / np.linalg.norm(u)

    defect = max(float(w[-2]), 0.0) / lam1 if n > 1 else 0.0
    return u, lam1, defect
