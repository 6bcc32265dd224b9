"""Bilinear specialization: coupling x^T B y, with analytic dual elimination.

For ``min_x max_y p(x) + x^T B y - q(y)`` with strongly convex composites,
the strong convexity is moved into the coupling term and the prox
subproblem of each outer step collapses, after maximizing out y in closed
form, to an unconstrained quadratic in x solved by accelerated gradient
descent.  Every B or B^T product is counted individually, so coupling cost
is measured in matrix-vector products.

The reduced quadratic is ``x^T A x + b^T x + c`` with

    A = (1/2) ((1/eta_x + mu_p)(1/eta_y + mu_q) I + B B^T)
    b = (1/eta_y + mu_q) (gp - x_k/eta_x) - B (gq - y_k/eta_y)
    c = (1/eta_y + mu_q) (||x_k||^2/(2 eta_x) - ||y_k||^2/(2 eta_y))
        + ||y_k/eta_y - gq||^2 / 2

where gp, gq are the frozen split-composite gradients.  The whole
objective is scaled by (1/eta_y + mu_q) relative to the direct reduction,
which leaves the minimizer unchanged; b and c here come from an
independent re-derivation verified against direct saddle solves (see the
elimination-consistency tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (
    BudgetExhausted,
    DimensionMismatch,
    InconsistentConstants,
    InfeasibleTarget,
    InnerBudgetExhausted,
    NonPositiveInput,
    NonPositiveModulus,
)
from .inner import (
    ACCEPTED_CRITERION,
    ACCEPTED_STALL,
    AuxiliaryProblem,
    InnerConfig,
    InnerResult,
)
from .outer import (
    ConvergenceReport,
    OuterState,
    SolveConfig,
    SolverTuning,
    check_inner_criterion,
    solve,
    tune_parameters,
)
from .problems import (
    CompositeSaddleProblem,
    OracleCounters,
    PointPair,
    SmoothnessSpec,
)


@dataclass(frozen=True)
class CouplingOperator:
    """Matrix-free coupling B with spectral bounds of B B^T.

    ``matvec`` maps y to B y (length d_x), ``rmatvec`` maps x to B^T x
    (length d_y).

    For rank-deficient couplings (graph Laplacians), ``kernel_basis`` may
    hold orthonormal columns spanning ker(B^T) together with the smallest
    nonzero eigenvalue ``lambda_min_plus_BBt``; the reduced inner solver
    then handles the kernel component analytically and converges at the
    positive part of the spectrum.
    """

    matvec: Callable[[np.ndarray], np.ndarray]
    rmatvec: Callable[[np.ndarray], np.ndarray]
    d_x: int
    d_y: int
    lambda_max_BBt: float
    lambda_min_BBt: float
    kernel_basis: Optional[np.ndarray] = None
    lambda_min_plus_BBt: Optional[float] = None

    def __post_init__(self):
        if not (self.lambda_max_BBt >= self.lambda_min_BBt >= 0.0):
            raise InconsistentConstants(
                f"need lambda_max >= lambda_min >= 0, got "
                f"{self.lambda_max_BBt}, {self.lambda_min_BBt}"
            )
        if self.kernel_basis is not None and self.lambda_min_plus_BBt is None:
            raise InconsistentConstants(
                "kernel_basis requires lambda_min_plus_BBt"
            )

    @classmethod
    def from_dense(cls, B: np.ndarray) -> "CouplingOperator":
        B = np.asarray(B, dtype=float)
        d_x, d_y = B.shape
        s = np.linalg.svd(B, compute_uv=False)
        lam_max = float(s[0] ** 2) if s.size else 0.0
        lam_min = float(s[-1] ** 2) if d_x <= d_y else 0.0
        return cls(
            matvec=lambda v, _B=B: _B @ v,
            rmatvec=lambda v, _B=B: _B.T @ v,
            d_x=d_x,
            d_y=d_y,
            lambda_max_BBt=lam_max,
            lambda_min_BBt=lam_min,
        )


def estimate_spectral_bounds(
    matvec: Callable,
    rmatvec: Callable,
    d_x: int,
    d_y: int,
    iters: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
) -> Tuple[float, float, int]:
    """Estimate (lambda_max, lambda_min) of B B^T without forming it.

    lambda_max comes from power iteration on B B^T; lambda_min from inverse
    power iteration on the slightly shifted B B^T + delta I, each inverse
    application computed by accelerated gradient descent.  Returns the
    estimates and the number of B/B^T products spent, which callers should
    log separately from solver oracle counts.
    """
    rng = np.random.default_rng(seed)
    used = {"n": 0}

    def bbt(v):
        used["n"] += 2
        return matvec(rmatvec(v))

    v = rng.standard_normal(d_x)
    v /= np.linalg.norm(v)
    lam_max = 0.0
    for _ in range(iters):
        w = bbt(v)
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            lam_max = 0.0
            break
        v_next = w / nw
        if abs(lam - lam_max) <= tol * max(abs(lam), 1e-30):
            lam_max = lam
            v = v_next
            break
        lam_max = lam
        v = v_next

    if lam_max <= 0.0:
        return 0.0, 0.0, used["n"]

    delta = 1e-6 * lam_max
    u = rng.standard_normal(d_x)
    u /= np.linalg.norm(u)
    lam_min = lam_max
    for _ in range(iters):
        # z = (B B^T + delta I)^{-1} u, via AGD on the induced quadratic.
        def gradient_fn(x, _u=u):
            return bbt(x) + delta * x - _u, None

        z, _ = _agd_loop(
            gradient_fn,
            mu_h=delta,
            l_h=lam_max + delta,
            start=u / (lam_max + delta),
            tol=1e-9 * np.linalg.norm(u),
            max_iter=50_000,
        )
        nz = np.linalg.norm(z)
        if nz == 0.0:
            break
        u = z / nz
        lam = float(u @ bbt(u))
        if abs(lam - lam_min) <= tol * max(abs(lam), 1e-30):
            lam_min = lam
            break
        lam_min = lam
    return lam_max, max(lam_min, 0.0), used["n"]


@dataclass(frozen=True)
class BilinearProblem:
    """``min_x max_y p(x) + x^T B y - q(y)`` with strongly convex p and q."""

    grad_p: Callable[[np.ndarray], np.ndarray]
    grad_q: Callable[[np.ndarray], np.ndarray]
    L_p: float
    mu_p: float
    L_q: float
    mu_q: float
    coupling: CouplingOperator
    value_p: Optional[Callable] = None
    value_q: Optional[Callable] = None

    @property
    def d_x(self) -> int:
        return self.coupling.d_x

    @property
    def d_y(self) -> int:
        return self.coupling.d_y


def wrap_counting_bilinear(
    bp: BilinearProblem,
) -> Tuple[BilinearProblem, OracleCounters]:
    """Count composite gradients and individual B/B^T products.

    Each matvec or rmatvec adds one to ``calls_grad_R``.
    """
    counters = OracleCounters()

    def counted_grad_p(x):
        counters.calls_grad_p += 1
        return bp.grad_p(x)

    def counted_grad_q(y):
        counters.calls_grad_q += 1
        return bp.grad_q(y)

    def counted_matvec(v):
        counters.calls_grad_R += 1
        return bp.coupling.matvec(v)

    def counted_rmatvec(v):
        counters.calls_grad_R += 1
        return bp.coupling.rmatvec(v)

    coupling = CouplingOperator(
        matvec=counted_matvec,
        rmatvec=counted_rmatvec,
        d_x=bp.coupling.d_x,
        d_y=bp.coupling.d_y,
        lambda_max_BBt=bp.coupling.lambda_max_BBt,
        lambda_min_BBt=bp.coupling.lambda_min_BBt,
        kernel_basis=bp.coupling.kernel_basis,
        lambda_min_plus_BBt=bp.coupling.lambda_min_plus_BBt,
    )
    wrapped = BilinearProblem(
        grad_p=counted_grad_p,
        grad_q=counted_grad_q,
        L_p=bp.L_p,
        mu_p=bp.mu_p,
        L_q=bp.L_q,
        mu_q=bp.mu_q,
        coupling=coupling,
        value_p=bp.value_p,
        value_q=bp.value_q,
    )
    return wrapped, counters


def split_bilinear(bp: BilinearProblem) -> Tuple[CompositeSaddleProblem, SmoothnessSpec]:
    """Move the composite strong convexity into the coupling term.

    Returns the composite problem with ``p~(x) = p(x) - (mu_p/2)||x||^2``,
    ``q~(y) = q(y) - (mu_q/2)||y||^2`` and
    ``R(x, y) = (mu_p/2)||x||^2 + x^T B y - (mu_q/2)||y||^2``, together
    with its smoothness constants (``L_R`` uses the safe bound
    ``mu_p + mu_q + sqrt(lambda_max(B B^T))``).
    """
    if bp.mu_p <= 0.0 or bp.mu_q <= 0.0:
        raise NonPositiveModulus(f"mu_p={bp.mu_p}, mu_q={bp.mu_q} must be positive")
    mu_p, mu_q = bp.mu_p, bp.mu_q
    coupling = bp.coupling

    def grad_p_tilde(x):
        return bp.grad_p(x) - mu_p * x

    def grad_q_tilde(y):
        return bp.grad_q(y) - mu_q * y

    def grad_R(x, y):
        return mu_p * x + coupling.matvec(y), coupling.rmatvec(x) - mu_q * y

    value_p = value_q = value_R = None
    if bp.value_p is not None:
        value_p = lambda x: bp.value_p(x) - 0.5 * mu_p * float(x @ x)
    if bp.value_q is not None:
        value_q = lambda y: bp.value_q(y) - 0.5 * mu_q * float(y @ y)
    value_R = lambda x, y: (
        0.5 * mu_p * float(x @ x)
        + float(x @ coupling.matvec(y))
        - 0.5 * mu_q * float(y @ y)
    )

    problem = CompositeSaddleProblem(
        d_x=coupling.d_x,
        d_y=coupling.d_y,
        grad_p=grad_p_tilde,
        grad_q=grad_q_tilde,
        grad_R=grad_R,
        value_p=value_p,
        value_q=value_q,
        value_R=value_R,
    )
    spec = SmoothnessSpec(
        L_p=max(bp.L_p - mu_p, 0.0),
        L_q=max(bp.L_q - mu_q, 0.0),
        L_R=mu_p + mu_q + math.sqrt(coupling.lambda_max_BBt),
        mu_x=mu_p,
        mu_y=mu_q,
    )
    return problem, spec


@dataclass
class QuadraticForm:
    """Reduced objective ``x^T A x + b^T x + c`` with matrix-free A.

    ``A = (kappa I + B B^T)/2`` is applied through one B and one B^T
    product per call; the gradient convention is ``2 A x + b``.
    ``recover_y`` maps an x-candidate to the exact inner maximizer of the
    underlying saddle.
    """

    matvec: Callable
    rmatvec: Callable
    kappa: float
    shift: float  # 1/eta_y + mu_q
    b: np.ndarray
    c: float
    eta_y: float
    y_anchor: np.ndarray
    grad_q_anchor: np.ndarray

    def apply_A(self, v: np.ndarray) -> np.ndarray:
        return 0.5 * (self.kappa * v + self.matvec(self.rmatvec(v)))

    def gradient(self, v: np.ndarray) -> np.ndarray:
        return 2.0 * self.apply_A(v) + self.b

    def gradient_with_coupling(self, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Gradient plus the intermediate B^T v, for reuse by callers."""
        bt_v = self.rmatvec(v)
        grad = self.kappa * v + self.matvec(bt_v) + self.b
        return grad, bt_v

    def recover_y(self, x: np.ndarray, bt_x: Optional[np.ndarray] = None) -> np.ndarray:
        if bt_x is None:
            bt_x = self.rmatvec(x)
        return (bt_x - self.grad_q_anchor + self.y_anchor / self.eta_y) / self.shift

    def value(self, v: np.ndarray) -> float:
        return float(v @ self.apply_A(v) + self.b @ v + self.c)


def _eliminate_from_parts(
    bp: BilinearProblem,
    gp: np.ndarray,
    gq: np.ndarray,
    x_k: np.ndarray,
    y_k: np.ndarray,
    tuning: SolverTuning,
) -> QuadraticForm:
    if gp.shape != (bp.d_x,) or gq.shape != (bp.d_y,):
        raise DimensionMismatch(
            f"gradients have shapes {gp.shape}/{gq.shape}, expected "
            f"({bp.d_x},)/({bp.d_y},)"
        )
    eta_x, eta_y = tuning.eta_x, tuning.eta_y
    shift = 1.0 / eta_y + bp.mu_q
    kappa = (1.0 / eta_x + bp.mu_p) * shift
    w = gq - y_k / eta_y
    b = shift * (gp - x_k / eta_x) - bp.coupling.matvec(w)
    c = shift * (
        float(x_k @ x_k) / (2.0 * eta_x) - float(y_k @ y_k) / (2.0 * eta_y)
    ) + 0.5 * float(w @ w)
    return QuadraticForm(
        matvec=bp.coupling.matvec,
        rmatvec=bp.coupling.rmatvec,
        kappa=kappa,
        shift=shift,
        b=b,
        c=c,
        eta_y=eta_y,
        y_anchor=y_k,
        grad_q_anchor=gq,
    )


def eliminate_y(
    bp: BilinearProblem, state: OuterState, tuning: SolverTuning
) -> QuadraticForm:
    """Reduce the bilinear prox subproblem to a quadratic in x.

    ``state`` must carry the split-composite gradients (the form the outer
    loop caches when running on `split_bilinear` output).  The minimizer
    x of the returned form together with ``recover_y(x)`` is the unique
    saddle of the subproblem.
    """
    return _eliminate_from_parts(
        bp, state.grad_p_g, state.grad_q_g, state.z.x, state.z.y, tuning
    )


def _agd_loop(gradient_fn, mu_h, l_h, start, tol, max_iter, stop_check=None):
    """Nesterov's method for mu_h-strongly convex, l_h-smooth objectives.

    ``gradient_fn(x) -> (grad, extra)``; ``stop_check(x, grad, extra)`` may
    accept early.  Returns the evaluation point whose gradient passed a
    test, with the number of update steps taken.
    """
    momentum = (math.sqrt(l_h) - math.sqrt(mu_h)) / (math.sqrt(l_h) + math.sqrt(mu_h))
    x_prev = start.copy()
    y_pt = start.copy()
    for t in range(max_iter + 1):
        g, extra = gradient_fn(y_pt)
        if stop_check is not None and stop_check(y_pt, g, extra):
            return y_pt, t
        if stop_check is None and np.linalg.norm(g) <= tol:
            return y_pt, t
        if t == max_iter:
            break
        x_new = y_pt - g / l_h
        y_pt = x_new + momentum * (x_new - x_prev)
        x_prev = x_new
    raise BudgetExhausted(f"gradient tolerance unmet after {max_iter} iterations")


def agd_quadratic(
    qf: QuadraticForm,
    mu_A: float,
    L_A: float,
    start: np.ndarray,
    tol: float,
    max_iter: int = 200_000,
) -> np.ndarray:
    """Minimize ``x^T A x + b^T x`` to gradient norm <= tol.

    ``mu_A``/``L_A`` must bound the spectrum of A; the iteration count is
    O(sqrt(L_A/mu_A) log(1/tol)) A-applications.
    """
    if not (0.0 < mu_A <= L_A):
        raise NonPositiveInput(f"need 0 < mu_A <= L_A, got {mu_A}, {L_A}")
    x, _ = _agd_loop(
        lambda v: (qf.gradient(v), None),
        mu_h=2.0 * mu_A,
        l_h=2.0 * L_A,
        start=np.asarray(start, dtype=float).copy(),
        tol=tol,
        max_iter=max_iter,
    )
    return x


def make_bilinear_inner_solver(bp: BilinearProblem):
    """Inner solver closure: eliminate y, run AGD until the outer criterion.

    ``bp`` should be the counting-wrapped problem so B/B^T products land in
    ``calls_grad_R``.
    """

    def inner(
        aux: AuxiliaryProblem,
        spec: SmoothnessSpec,
        tuning: SolverTuning,
        config: InnerConfig,
    ) -> InnerResult:
        qf = _eliminate_from_parts(
            bp, aux.grad_p_anchor, aux.grad_q_anchor, aux.x_k, aux.y_k, tuning
        )
        kernel = bp.coupling.kernel_basis
        if kernel is not None:
            # The kernel block of the reduced quadratic decouples (B'U = 0):
            # pin it at its exact minimizer and run AGD on the orthogonal
            # complement, where the curvature floor is kappa + lambda_min_plus.
            ker_opt = -(kernel.T @ qf.b) / qf.kappa
            start = aux.x_k + kernel @ (ker_opt - kernel.T @ aux.x_k)
            mu_A = 0.5 * (qf.kappa + bp.coupling.lambda_min_plus_BBt)

            def gradient_fn(v):
                grad, bt_v = qf.gradient_with_coupling(v)
                coef = kernel.T @ grad
                return grad - kernel @ coef, (bt_v, coef)

        else:
            start = aux.x_k.copy()
            mu_A = 0.5 * (qf.kappa + bp.coupling.lambda_min_BBt)

            def gradient_fn(v):
                grad, bt_v = qf.gradient_with_coupling(v)
                return grad, (bt_v, None)

        L_A = 0.5 * (qf.kappa + bp.coupling.lambda_max_BBt)
        accepted = {}
        state = {"prev": None, "stalled": 0}

        def stop_check(x_pt, grad, extra):
            bt_x, _ = extra
            prev = state["prev"]
            if prev is not None:
                moved = float(np.linalg.norm(x_pt - prev)) / max(
                    float(np.linalg.norm(prev)), 1.0
                )
                state["stalled"] = state["stalled"] + 1 if moved <= 1e-15 else 0
            state["prev"] = x_pt.copy()

            y_pt = qf.recover_y(x_pt, bt_x)
            # Evaluate the subproblem gradients from their definition (one
            # extra B product) rather than unscaling the reduced gradient,
            # which would amplify its rounding noise by 1/shift.
            g_x = (
                aux.grad_p_anchor
                + (x_pt - aux.x_k) / tuning.eta_x
                + bp.mu_p * x_pt
                + bp.coupling.matvec(y_pt)
            )
            g_y = (
                bt_x
                - bp.mu_q * y_pt
                - (y_pt - aux.y_k) / tuning.eta_y
                - aux.grad_q_anchor
            )
            ok = check_inner_criterion(
                g_x, g_y, x_pt - aux.x_k, y_pt - aux.y_k, tuning, config.floor_tol
            )
            # An iterate pinned in place for many steps is the subproblem
            # solution to machine precision; nothing better is representable.
            if not ok and state["stalled"] >= config.stall_window:
                accepted.update(x=x_pt, y=y_pt, g_x=g_x, g_y=g_y,
                                by=ACCEPTED_STALL)
                return True
            if ok:
                accepted.update(x=x_pt, y=y_pt, g_x=g_x, g_y=g_y,
                                by=ACCEPTED_CRITERION)
            return ok

        try:
            _, iterations = _agd_loop(
                gradient_fn,
                mu_h=2.0 * mu_A,
                l_h=2.0 * L_A,
                start=start,
                tol=0.0,
                max_iter=config.max_inner,
                stop_check=stop_check,
            )
        except BudgetExhausted as exc:
            raise InnerBudgetExhausted(str(exc)) from exc
        return InnerResult(
            pair=PointPair(accepted["x"], accepted["y"]),
            iterations=iterations,
            grad_x=accepted["g_x"],
            grad_y=accepted["g_y"],
            accepted_by=accepted["by"],
        )

    return inner


def solve_bilinear(
    bp: BilinearProblem,
    start: PointPair,
    eps: float,
    *,
    max_outer: int = 100_000,
    psi_0: Optional[float] = None,
    known_solution: Optional[PointPair] = None,
    track_potential: bool = False,
    track_inner_details: bool = False,
    use_residual_stop: bool = False,
    inner: Optional[InnerConfig] = None,
) -> ConvergenceReport:
    """Sliding solver specialized to bilinear coupling.

    Splits the composites, then runs the outer loop with the
    elimination-plus-AGD inner solver.  ``counters.calls_grad_R`` in the
    report counts individual B/B^T products.
    """
    if eps <= 0.0:
        raise NonPositiveInput(f"eps={eps}")
    wrapped, counters = wrap_counting_bilinear(bp)
    composite, spec = split_bilinear(wrapped)
    diagnostic, _ = split_bilinear(bp)
    config = SolveConfig(
        eps=eps,
        max_outer=max_outer,
        inner=inner if inner is not None else InnerConfig(),
        track_potential=track_potential,
        known_solution=known_solution,
        psi_0=psi_0,
        use_residual_stop=use_residual_stop,
        track_inner_details=track_inner_details,
    )
    return solve(
        composite,
        spec,
        start,
        config,
        inner_solver=make_bilinear_inner_solver(wrapped),
        counters=counters,
        diagnostic_problem=diagnostic,
    )


def solve_affine_constrained(
    grad_p: Callable,
    L_p: float,
    mu_p: float,
    coupling: CouplingOperator,
    c: np.ndarray,
    D_y: float,
    eps: float,
    *,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    value_p: Optional[Callable] = None,
    max_outer: int = 100_000,
    inner: Optional[InnerConfig] = None,
    track_inner_details: bool = False,
) -> ConvergenceReport:
    """Minimize p subject to ``B^T x = c`` through the regularized saddle.

    The equivalent saddle ``min_x max_y p(x) + x^T B y - y^T c`` gets the
    dual regularizer ``(eps/(16 D_y^2)) ||y||^2``; solving it to accuracy
    2 eps / 3 certifies an eps-solution of the constrained problem.  The
    solve target is additionally tightened to ``eps / (4 lambda_max(BB^T))``
    so the constraint residual of the final primal lands below
    ``sqrt(eps) (1 + ||c||)``.  ``D_y`` must bound the norm of some dual
    solution.

    Raises
    ------
    InfeasibleTarget
        If the final constraint residual exceeds ``sqrt(eps)(1 + ||c||)``,
        signalling c outside range(B^T) or an underestimated D_y.
    """
    if eps <= 0.0 or D_y <= 0.0:
        raise NonPositiveInput(f"eps={eps}, D_y={D_y}")
    if mu_p <= 0.0:
        raise NonPositiveModulus(f"mu_p={mu_p}")
    c = np.asarray(c, dtype=float)
    coeff_y = eps / (16.0 * D_y**2)
    mu_q = 2.0 * coeff_y

    def grad_q(y):
        return c + mu_q * y

    def value_q(y):
        return float(c @ y) + coeff_y * float(y @ y)

    bp = BilinearProblem(
        grad_p=grad_p,
        grad_q=grad_q,
        L_p=L_p,
        mu_p=mu_p,
        L_q=mu_q,
        mu_q=mu_q,
        coupling=coupling,
        value_p=value_p,
        value_q=value_q,
    )
    _, spec = split_bilinear(bp)
    tuning = tune_parameters(spec)
    target_unweighted = min(
        2.0 * eps / 3.0, eps / (4.0 * max(1.0, coupling.lambda_max_BBt))
    )
    tau = target_unweighted / max(1.0, tuning.eta_x, tuning.eta_y)

    x0 = np.zeros(coupling.d_x) if x0 is None else np.asarray(x0, dtype=float)
    y0 = np.zeros(coupling.d_y) if y0 is None else np.asarray(y0, dtype=float)
    # A priori potential bound; only its logarithm matters.  The saddle's
    # x-block is within ||grad p(0)||/mu_p + sqrt(lambda_max) D_y / mu_p of
    # the origin, its y-block within D_y.
    gp0 = np.linalg.norm(grad_p(np.zeros(coupling.d_x)))
    x_reach = gp0 / mu_p + math.sqrt(coupling.lambda_max_BBt) * D_y / mu_p
    psi_0 = 2.0 * (
        (1.0 / tuning.eta_x + spec.L_p / tuning.alpha)
        * (np.linalg.norm(x0) + x_reach + 1.0) ** 2
        + (1.0 / tuning.eta_y) * (np.linalg.norm(y0) + D_y + 1.0) ** 2
    )

    report = solve_bilinear(
        bp,
        PointPair(x0, y0),
        tau,
        max_outer=max_outer,
        psi_0=psi_0,
        inner=inner,
        track_inner_details=track_inner_details,
    )
    residual = float(np.linalg.norm(coupling.rmatvec(report.final_pair.x) - c))
    report.constraint_residual = residual
    if residual > math.sqrt(eps) * (1.0 + np.linalg.norm(c)):
        raise InfeasibleTarget(
            f"constraint residual {residual:.3e} did not reach "
            f"{math.sqrt(eps) * (1.0 + np.linalg.norm(c)):.3e}; "
            "is c in range(B^T) and D_y large enough?"
        )
    return report


def solve_bilinear_linear_composites(
    d: np.ndarray,
    c: np.ndarray,
    coupling: CouplingOperator,
    D_x: float,
    D_y: float,
    eps: float,
    *,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    max_outer: int = 100_000,
    inner: Optional[InnerConfig] = None,
) -> ConvergenceReport:
    """Solve ``min_x max_y x^T d + x^T B y - y^T c`` by double regularization.

    Requires full row rank coupling (lambda_min(B B^T) > 0) and norm
    bounds ``||x*|| <= D_x``, ``||y*|| <= D_y`` on the solution.  Both
    blocks get ``(eps/16 D^2)||.||^2`` regularizers and the regularized
    problem is solved to unweighted accuracy eps/2, which certifies an
    eps-solution of the original.

    Since both step sizes scale like ``D^2/eps``, recovering the dual from
    ``B^T x`` loses roughly ``eps/(16 D^2)`` relative precision; in float64
    the reduction is reliable down to ``eps/D^2`` around 1e-5 and degrades
    below that.
    """
    if eps <= 0.0 or D_x <= 0.0 or D_y <= 0.0:
        raise NonPositiveInput(f"eps={eps}, D_x={D_x}, D_y={D_y}")
    if coupling.lambda_min_BBt <= 0.0:
        raise InconsistentConstants(
            f"lambda_min(B B^T)={coupling.lambda_min_BBt} must be positive"
        )
    d = np.asarray(d, dtype=float)
    c = np.asarray(c, dtype=float)
    coeff_x = eps / (16.0 * D_x**2)
    coeff_y = eps / (16.0 * D_y**2)
    mu_p = 2.0 * coeff_x
    mu_q = 2.0 * coeff_y

    bp = BilinearProblem(
        grad_p=lambda x: d + mu_p * x,
        grad_q=lambda y: c + mu_q * y,
        L_p=mu_p,
        mu_p=mu_p,
        L_q=mu_q,
        mu_q=mu_q,
        coupling=coupling,
        value_p=lambda x: float(d @ x) + coeff_x * float(x @ x),
        value_q=lambda y: float(c @ y) + coeff_y * float(y @ y),
    )
    _, spec = split_bilinear(bp)
    tuning = tune_parameters(spec)
    tau = (eps / 2.0) / max(1.0, tuning.eta_x, tuning.eta_y)

    x0 = np.zeros(coupling.d_x) if x0 is None else np.asarray(x0, dtype=float)
    y0 = np.zeros(coupling.d_y) if y0 is None else np.asarray(y0, dtype=float)
    # Split composites are linear, so the Bregman terms of the potential
    # vanish and the distance part is bounded through D_x, D_y.
    root = math.sqrt(eps)
    psi_0 = 2.0 * (
        (1.0 / tuning.eta_x) * (np.linalg.norm(x0) + D_x + root + 1.0) ** 2
        + (1.0 / tuning.eta_y) * (np.linalg.norm(y0) + D_y + root + 1.0) ** 2
    )
    return solve_bilinear(
        bp,
        PointPair(x0, y0),
        tau,
        max_outer=max_outer,
        psi_0=psi_0,
        inner=inner,
    )
