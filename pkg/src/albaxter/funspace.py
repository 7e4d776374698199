"""Function-space realization of the quantum monodromy.

Operators act on evaluable functions of (r_1..r_N) through the Jackson
calculus: q_k is the scaled difference (f(r) - f(.., alpha r_k, ..))/r_k
and r_k is multiplication by the coordinate.  Operator application is
evaluation-driven (no symbol pushing): applying the monodromy trace to a
product kernel rho = prod_k rho_k at a point spawns a tree of alpha-scaled
re-evaluations of rho, memoized per base point.

This is where the pointwise q-difference trace identity

    (Tr L(mu) rho)(r) = mu^N rho_{mu/sa}(r) + mu^(-N) rho_{mu sa}(alpha r)

is verified, together with the site-by-site triangularization that produces
it.
"""

import numpy as np

from .algebra import Mat2
from .qcalc import jackson_op, qpochhammer_inf

EVAL_GUARD_SITES = 10


# ---------------------------------------------------------------------------
# Evaluable expressions


class FuncExpr:
    """Expression tree over r_1..r_N; immutable, callable on a point array."""

    def eval(self, point):
        raise NotImplementedError

    def __call__(self, point):
        return self.eval(np.asarray(point, dtype=complex))

    def scale(self, k, factor):
        """Substitution r_k -> factor * r_k as a lazy wrapper node."""
        return Scaled.of(self, k, factor)

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __truediv__(self, other):
        return Div(self, _lift(other))

    def __rtruediv__(self, other):
        return Div(_lift(other), self)

    def __pow__(self, p):
        return Pow(self, p)

    def __neg__(self):
        return Mul(Const(-1.0), self)


def _lift(v):
    return v if isinstance(v, FuncExpr) else Const(v)


class Const(FuncExpr):
    def __init__(self, value):
        self.value = complex(value)

    def eval(self, point):
        return self.value


class Var(FuncExpr):
    """Coordinate r_k, 1-based."""

    def __init__(self, k):
        self.k = int(k)

    def eval(self, point):
        return complex(point[self.k - 1])


class Add(FuncExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def eval(self, point):
        return self.a.eval(point) + self.b.eval(point)


class Sub(FuncExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def eval(self, point):
        return self.a.eval(point) - self.b.eval(point)


class Mul(FuncExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def eval(self, point):
        return self.a.eval(point) * self.b.eval(point)


class Div(FuncExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def eval(self, point):
        return self.a.eval(point) / self.b.eval(point)


class Pow(FuncExpr):
    def __init__(self, base, p):
        self.base, self.p = base, p

    def eval(self, point):
        return self.base.eval(point) ** self.p


class PochInv(FuncExpr):
    """Reciprocal q-Pochhammer 1/(child; alpha)_inf, the q-exponential block."""

    def __init__(self, child, qp):
        self.child = child
        self.qp = qp

    def eval(self, point):
        v = qpochhammer_inf(self.child.eval(point), self.qp)
        if abs(v) < 1e-12:
            raise ZeroDivisionError("pole of reciprocal q-Pochhammer")
        return 1.0 / v


class Scaled(FuncExpr):
    """Coordinate rescaling r -> factors * r, merged across nesting so that
    substitution commutes with evaluation exactly."""

    def __init__(self, child, factors):
        self.child = child
        self.factors = np.asarray(factors, dtype=complex)

    @classmethod
    def of(cls, child, k, factor):
        if isinstance(child, Scaled):
            f = child.factors.copy()
            if k > f.size:
                f = np.concatenate([f, np.ones(k - f.size, dtype=complex)])
            f[k - 1] *= factor
            return cls(child.child, f)
        f = np.ones(k, dtype=complex)
        f[k - 1] = factor
        return cls(child, f)

    def eval(self, point):
        pt = np.array(point, dtype=complex)
        n = min(pt.size, self.factors.size)
        pt[:n] = pt[:n] * self.factors[:n]
        return self.child.eval(pt)


# ---------------------------------------------------------------------------
# Operators


class OpExpr:
    """Composition tree of operators acting on evaluable functions.

    `a * b` is composition (a after b), matching how 2x2 entry products
    arise in the monodromy; `a + b` is the pointwise sum.  Application
    produces a closure; q_k spawns alpha-scaled evaluations of its operand,
    memoized per base function.
    """

    def apply(self, f, lam0=None):
        memo = {}

        def base(point):
            key = point.tobytes()
            if key not in memo:
                memo[key] = f(point) if callable(f) else f.eval(point)
            return memo[key]

        return self._build(base, lam0)

    def _build(self, fev, lam0):
        raise NotImplementedError

    def __add__(self, other):
        return OpAdd(self, other)

    def __mul__(self, other):
        if isinstance(other, OpExpr):
            return OpCompose(self, other)
        return OpCompose(OpScalar(other), self)

    def __rmul__(self, other):
        return OpCompose(OpScalar(other), self)


class OpScalar(OpExpr):
    def __init__(self, c):
        self.c = complex(c)

    def _build(self, fev, lam0):
        return lambda point: self.c * fev(point)


class OpLambdaPow(OpExpr):
    """Multiplication by lam0^p, with lam0 supplied at application time."""

    def __init__(self, p):
        self.p = int(p)

    def _build(self, fev, lam0):
        if lam0 is None:
            raise ValueError("operator contains lambda powers; pass lam0")
        c = complex(lam0) ** self.p
        return lambda point: c * fev(point)


class OpMulVar(OpExpr):
    """Multiplication by the coordinate r_k."""

    def __init__(self, k):
        self.k = int(k)

    def _build(self, fev, lam0):
        return lambda point: point[self.k - 1] * fev(point)


class OpJackson(OpExpr):
    """The operator q_k: f -> (f(r) - f(.., alpha r_k, ..)) / r_k."""

    def __init__(self, k, qp):
        self.k = int(k)
        self.qp = qp

    def _build(self, fev, lam0):
        a = self.qp.alpha
        k = self.k

        def run(point):
            rk = point[k - 1]
            if rk == 0:
                raise ZeroDivisionError("q_k needs r_k != 0")
            scaled = np.array(point, dtype=complex)
            scaled[k - 1] *= a
            return (fev(point) - fev(scaled)) / rk

        return run


class OpAdd(OpExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def _build(self, fev, lam0):
        fa = self.a._build(fev, lam0)
        fb = self.b._build(fev, lam0)
        return lambda point: fa(point) + fb(point)


class OpCompose(OpExpr):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def _build(self, fev, lam0):
        inner = self.b._build(fev, lam0)
        return self.a._build(inner, lam0)


def apply_opexpr(op, f, point, lam0=None):
    """Apply an operator expression to an evaluable f at a point."""
    return op.apply(f, lam0)(np.asarray(point, dtype=complex))


def local_lax_op(k, qp):
    """Operator-valued Lax matrix [[lam, q_k], [r_k, 1/lam]] at site k."""
    return Mat2(OpLambdaPow(1), OpJackson(k, qp),
                OpMulVar(k), OpLambdaPow(-1))


def monodromy_op(N, qp):
    """Operator monodromy L_N ... L_1 over the OpExpr ring."""
    M = None
    for k in range(1, N + 1):
        Lk = local_lax_op(k, qp)
        M = Lk if M is None else Lk @ M
    return M


def monodromy_trace_op(N, qp):
    M = monodromy_op(N, qp)
    return M.a11 + M.a22


# ---------------------------------------------------------------------------
# Product kernels and the trace identity


def rho_site_expr(mu, qp, rtilde_k, rtilde_km1, k, normalization=1.0):
    """Site factor rho_k as a FuncExpr in the coordinate r_k."""
    if mu == 0 or rtilde_k == 0 or rtilde_km1 == 0:
        raise ValueError("mu and rtilde parameters must be nonzero")
    v = Var(k)
    p1 = PochInv(Mul(v, Const(1.0 / rtilde_km1)), qp)
    p2 = PochInv(Mul(v, Const(-1.0 / (mu**2 * rtilde_k))), qp)
    expr = Mul(p1, p2)
    if normalization != 1.0:
        expr = Mul(Const(normalization), expr)
    return expr


def rho_product(mu, qp, rtilde, normalizations=None):
    """Product kernel rho = prod_k rho_k(mu, r_k) with periodic parameters."""
    rtilde = np.asarray(rtilde, dtype=complex)
    N = rtilde.size
    expr = None
    for k in range(1, N + 1):
        gk = 1.0 if normalizations is None else normalizations[k - 1]
        factor = rho_site_expr(mu, qp, rtilde[k - 1], rtilde[k - 2], k, gk)
        expr = factor if expr is None else Mul(expr, factor)
    return expr


def baxter_action_residual(mu, qp, rtilde, sample_points,
                           shift=None):
    """Pointwise residual of the q-difference trace identity.

    For each sample r:  |(Tr L(mu) rho)(r) - mu^N rho_{mu/s}(r)
    - mu^(-N) rho_{mu s}(alpha r)| with s = sqrt(alpha) by default.
    Passing a wrong shift (e.g. s = alpha) is the negative control.
    """
    rtilde = np.asarray(rtilde, dtype=complex)
    N = rtilde.size
    if N > EVAL_GUARD_SITES:
        raise ValueError(f"evaluation blowup guard: N <= {EVAL_GUARD_SITES}")
    s = qp.sqrt_alpha if shift is None else complex(shift)
    tr_op = monodromy_trace_op(N, qp)
    rho = rho_product(mu, qp, rtilde)
    rho_up = rho_product(mu / s, qp, rtilde)
    rho_dn = rho_product(mu * s, qp, rtilde)
    worst = 0.0
    for pt in np.atleast_2d(np.asarray(sample_points, dtype=complex)):
        lhs = apply_opexpr(tr_op, rho, pt, lam0=mu)
        rhs = mu**N * rho_up(pt) + mu ** (-N) * rho_dn(qp.alpha * pt)
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def site_gauge_matrix(mu, rtilde, k):
    """The unit-determinant gauge matrix M_k = [[0, 1], [-1, -mu r~_{k-1}]]."""
    rtilde = np.asarray(rtilde, dtype=complex)
    return np.array([[0.0, 1.0], [-1.0, -mu * rtilde[k - 2]]], dtype=complex)


def triangular_check(mu, qp, rtilde, k, point):
    """Entrywise residuals of the gauged site action L^_k = M_{k+1}^-1 L_k M_k
    applied to rho_k at a point, against the lower-triangular form

        [[ (mu r~_k / r~_{k-1}) rho_k(mu/sa, r_k)          , 0 ],
         [ -q_k rho_k                                       ,
           (r~_{k-1} / (mu r~_k)) rho_k(mu sa, alpha r_k) ]].

    Returns abs residuals ordered (e11, e12, e21, e22); e12 is the defining
    condition of rho_k.
    """
    rtilde = np.asarray(rtilde, dtype=complex)
    N = rtilde.size
    point = np.asarray(point, dtype=complex)
    sa = qp.sqrt_alpha
    rt_k = rtilde[k - 1]
    rt_km1 = rtilde[k - 2]

    Mk = site_gauge_matrix(mu, rtilde, k)
    kp1 = k % N + 1
    Mk1 = site_gauge_matrix(mu, rtilde, kp1)
    Minv = np.array([[Mk1[1, 1], -Mk1[0, 1]], [-Mk1[1, 0], Mk1[0, 0]]],
                    dtype=complex)  # adjugate; det M = 1

    def scalar_mat(M):
        return Mat2(OpScalar(M[0, 0]), OpScalar(M[0, 1]),
                    OpScalar(M[1, 0]), OpScalar(M[1, 1]))

    Lhat = scalar_mat(Minv) @ local_lax_op(k, qp) @ scalar_mat(Mk)
    rho = rho_site_expr(mu, qp, rt_k, rt_km1, k)
    rho_up = rho_site_expr(mu / sa, qp, rt_k, rt_km1, k)
    rho_dn = rho_site_expr(mu * sa, qp, rt_k, rt_km1, k)

    val = {name: apply_opexpr(getattr(Lhat, name), rho, point, lam0=mu)
           for name in ("a11", "a12", "a21", "a22")}
    pt_scaled = np.array(point, dtype=complex)
    pt_scaled[k - 1] *= qp.alpha

    e11 = abs(val["a11"] - (mu * rt_k / rt_km1) * rho_up(point))
    e12 = abs(val["a12"])
    e21 = abs(val["a21"] + jackson_op(rho, k, qp, point))
    e22 = abs(val["a22"] - (rt_km1 / (mu * rt_k)) * rho_dn(pt_scaled))
    return np.array([e11, e12, e21, e22])


def delta_action_residual(f, qp, N, point):
    """|prod_k (1 - r_k q_k) f (point) - f(alpha point)|; exact identity."""
    op = None
    for k in range(1, N + 1):
        factor = OpAdd(OpScalar(1.0),
                       OpScalar(-1.0) * (OpMulVar(k) * OpJackson(k, qp)))
        op = factor if op is None else OpCompose(op, factor)
    point = np.asarray(point, dtype=complex)
    lhs = apply_opexpr(op, f, point)
    rhs = f(qp.alpha * point) if callable(f) else f.eval(qp.alpha * point)
    return float(abs(lhs - rhs))
