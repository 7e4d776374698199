"""Classical Ablowitz-Ladik phase space.

Site variables (q_k, r_k) live on a periodic lattice.  The local Lax matrix
is

    L_k(lam) = [[lam, q_k], [r_k, 1/lam]]

and the monodromy is the ordered product L(lam) = L_N L_{N-1} ... L_1.  Its
trace expands as sum_i H_i lam^(N-2i) with H_0 = H_N = 1, giving the
conserved quantities; det L(lam) = prod_k (1 - q_k r_k) is conserved too.
The Poisson structure is ultralocal:

    {q_k, r_j} = (1 - q_k r_k) delta_kj,   {q, q} = {r, r} = 0,

equivalent to the linear r-matrix relation {L (x) L} = [r, L (x) L].
"""

from dataclasses import dataclass

import numpy as np

from .algebra import LaurentPoly, Mat2, MultiDual, seed_duals

DEGENERACY_TOL = 1e-10


class DegenerateStateError(ValueError):
    """Raised when some |1 - q_k r_k| falls below the bracket-weight floor."""


class ChainState:
    """Periodic array of complex phase-space values (q_k, r_k), k = 1..N.

    Construction rejects states with |1 - q_k r_k| < 1e-10: the Poisson
    bracket weight degenerates there and Backlund denominators blow up.
    """

    __slots__ = ("N", "q", "r")

    def __init__(self, q, r):
        q = np.asarray(q, dtype=complex)
        r = np.asarray(r, dtype=complex)
        if q.ndim != 1 or q.shape != r.shape or q.size < 1:
            raise ValueError("q and r must be equal-length 1-d arrays")
        w = 1.0 - q * r
        if np.abs(w).min() < DEGENERACY_TOL:
            raise DegenerateStateError("state has 1 - q_k r_k ~ 0")
        self.N = q.size
        self.q = q
        self.q.setflags(write=False)
        self.r = r
        self.r.setflags(write=False)

    @classmethod
    def zeros(cls, N):
        return cls(np.zeros(N), np.zeros(N))

    @classmethod
    def random(cls, N, rng, scale=0.35):
        """Moderate-amplitude complex state, safely nondegenerate, with all
        |r_k| bounded away from zero (Backlund denominators)."""
        q = scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
        r = scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
        small = np.abs(r) < 0.3 * scale
        while np.any(small):
            r[small] = scale * (rng.standard_normal(small.sum())
                                + 1j * rng.standard_normal(small.sum()))
            small = np.abs(r) < 0.3 * scale
        return cls(q, r)

    @classmethod
    def random_real_positive(cls, N, rng):
        """Real data with r_k > 0 and 1 - q_k r_k > 0 (log-branch safe)."""
        q = rng.uniform(0.05, 0.45, N)
        r = rng.uniform(0.25, 0.85, N)
        return cls(q, r)

    def to_json_dict(self):
        pair = lambda z: [float(z.real), float(z.imag)]
        return {"N": int(self.N),
                "q": [pair(z) for z in self.q],
                "r": [pair(z) for z in self.r]}

    @classmethod
    def from_json_dict(cls, d):
        q = np.array([complex(re, im) for re, im in d["q"]])
        r = np.array([complex(re, im) for re, im in d["r"]])
        if len(q) != d["N"] or len(r) != d["N"]:
            raise ValueError("N does not match q/r lengths")
        return cls(q, r)

    def __repr__(self):
        return f"ChainState(N={self.N})"


@dataclass(frozen=True)
class ConservedSet:
    """Trace coefficients H_0..H_N and the determinant product."""
    H: np.ndarray
    det: complex

    def max_relative_drift(self, other):
        scale = np.maximum(np.abs(self.H), 1.0)
        dh = float((np.abs(self.H - other.H) / scale).max())
        dd = abs(self.det - other.det) / max(abs(self.det), 1.0)
        return max(dh, dd)


def local_lax(state, k):
    """Lax matrix at site k (1-based) over Laurent polynomials."""
    if not 1 <= k <= state.N:
        raise IndexError(f"site {k} out of range 1..{state.N}")
    return Mat2(LaurentPoly.x(1), LaurentPoly.const(state.q[k - 1]),
                LaurentPoly.const(state.r[k - 1]), LaurentPoly.x(-1))


def monodromy(state):
    """Ordered product L_N ... L_1 over Laurent polynomials."""
    M = None
    for k in range(1, state.N + 1):
        Lk = local_lax(state, k)
        M = Lk if M is None else Lk @ M
    return M


def monodromy_entries(qs, rs, lam):
    """Numeric monodromy at a fixed spectral point.

    Generic over the element arithmetic: complex or MultiDual values both
    work, which is how exact bracket gradients of the entries are obtained.
    """
    inv = 1.0 / lam
    m11, m12, m21, m22 = lam, qs[0], rs[0], inv
    for k in range(1, len(qs)):
        a11, a12, a21, a22 = lam, qs[k], rs[k], inv
        m11, m12, m21, m22 = (a11 * m11 + a12 * m21, a11 * m12 + a12 * m22,
                              a21 * m11 + a22 * m21, a21 * m12 + a22 * m22)
    return m11, m12, m21, m22


def monodromy_matrix(state, lam):
    """Numeric 2x2 monodromy as a numpy array."""
    return np.array(monodromy_entries(state.q, state.r, lam),
                    dtype=complex).reshape(2, 2)


def conserved_quantities(state):
    N = state.N
    tr = monodromy(state).trace()
    H = np.array([tr.coeff(N - 2 * i) for i in range(N + 1)], dtype=complex)
    det = complex(np.prod(1.0 - state.q * state.r))
    return ConservedSet(H=H, det=det)


def eom_rhs(state):
    """Right-hand side of the equations of motion.

    dq_k/dt = q_{k+1} + q_{k-1} - 2 q_k - q_k r_k (q_{k+1} + q_{k-1})
    dr_k/dt = -r_{k+1} - r_{k-1} + 2 r_k + q_k r_k (r_{k+1} + r_{k-1})
    """
    q, r = state.q, state.r
    qp, qm = np.roll(q, -1), np.roll(q, 1)
    rp, rm = np.roll(r, -1), np.roll(r, 1)
    dq = qp + qm - 2.0 * q - q * r * (qp + qm)
    dr = -rp - rm + 2.0 * r + q * r * (rp + rm)
    return dq, dr


def rk4_step(state, dt):
    """One classical Runge-Kutta 4 step; local error O(dt^5)."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    def rhs(q, r):
        return eom_rhs(ChainState(q, r))

    q, r = state.q, state.r
    k1q, k1r = rhs(q, r)
    k2q, k2r = rhs(q + 0.5 * dt * k1q, r + 0.5 * dt * k1r)
    k3q, k3r = rhs(q + 0.5 * dt * k2q, r + 0.5 * dt * k2r)
    k4q, k4r = rhs(q + dt * k3q, r + dt * k3r)
    qn = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
    rn = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    return ChainState(qn, rn)


def poisson_bracket(f, g, state):
    """Exact bracket of two observables.

    f and g are callables taking (q, r) where the entries support ring
    arithmetic; they are evaluated once on MultiDual-seeded variables, so
    the gradients entering

        {f, g} = sum_k (df/dq_k dg/dr_k - df/dr_k dg/dq_k)(1 - q_k r_k)

    are exact, not finite differences.
    """
    N = state.N
    nv = 2 * N
    qd = seed_duals(state.q, 0, nv)
    rd = seed_duals(state.r, N, nv)
    fd, gd = f(qd, rd), g(qd, rd)
    fp = fd.partials if isinstance(fd, MultiDual) else np.zeros(nv)
    gp = gd.partials if isinstance(gd, MultiDual) else np.zeros(nv)
    w = 1.0 - state.q * state.r
    return complex(np.sum((fp[:N] * gp[N:] - fp[N:] * gp[:N]) * w))


def observable_entry(i, j, lam):
    """Monodromy entry L(lam)_{ij} (1-based) as a bracket observable."""
    def f(q, r):
        return monodromy_entries(q, r, lam)[2 * (i - 1) + (j - 1)]
    return f


def observable_trace(lam):
    def f(q, r):
        e = monodromy_entries(q, r, lam)
        return e[0] + e[3]
    return f


def observable_conserved(i):
    """H_i extracted from the Laurent trace, as a bracket observable."""
    def f(q, r):
        M = None
        for k in range(len(q)):
            Lk = Mat2(LaurentPoly.x(1), LaurentPoly.const(q[k]),
                      LaurentPoly.const(r[k]), LaurentPoly.x(-1))
            M = Lk if M is None else Lk @ M
        return M.trace().coeff(len(q) - 2 * i)
    return f


def observable_det(q, r):
    acc = 1.0
    for qk, rk in zip(q, r):
        acc = acc * (1.0 - qk * rk)
    return acc


def classical_rmatrix(lam, nu):
    """The 4x4 classical r-matrix; singular at lam^2 = nu^2."""
    d = nu**2 - lam**2
    if abs(d) == 0:
        raise ZeroDivisionError("r-matrix singular at coincident parameters")
    s = 0.5 * (nu**2 + lam**2) / d
    b = lam * nu / d
    return np.array([
        [s, 0, 0, 0],
        [0, -0.5, b, 0],
        [0, b, 0.5, 0],
        [0, 0, 0, s],
    ], dtype=complex)


def rmatrix_relation_residual(state, lam, nu):
    """Max-entry residual of {L(lam) (x) L(nu)} = [r, L(lam) (x) L(nu)].

    The left side is the 4x4 of Poisson brackets between monodromy entries,
    computed with exact MultiDual gradients; Kronecker indexing follows
    T_{ab,gd} = A_{ab} B_{gd}.
    """
    if lam == 0 or nu == 0 or abs(lam**2 - nu**2) == 0:
        raise ZeroDivisionError("singular spectral parameters")
    N = state.N
    nv = 2 * N
    qd = seed_duals(state.q, 0, nv)
    rd = seed_duals(state.r, N, nv)
    Ml = monodromy_entries(qd, rd, lam)
    Mn = monodromy_entries(qd, rd, nu)
    w = 1.0 - state.q * state.r

    zero = np.zeros(nv, dtype=complex)

    def parts(e):
        # N=1 monodromy entries can be plain scalars (no dual content)
        return e.partials if isinstance(e, MultiDual) else zero

    lhs = np.zeros((4, 4), dtype=complex)
    for a in range(4):          # a encodes (i, j) of L(lam)
        for b in range(4):      # b encodes (k, l) of L(nu)
            p1, p2 = parts(Ml[a]), parts(Mn[b])
            br = np.sum((p1[:N] * p2[N:] - p1[N:] * p2[:N]) * w)
            i, j = divmod(a, 2)
            k, l = divmod(b, 2)
            lhs[2 * i + k, 2 * j + l] = br

    val = lambda e: e.value if isinstance(e, MultiDual) else complex(e)
    Mlv = np.array([val(e) for e in Ml]).reshape(2, 2)
    Mnv = np.array([val(e) for e in Mn]).reshape(2, 2)
    K = np.kron(Mlv, Mnv)
    rmat = classical_rmatrix(lam, nu)
    rhs = rmat @ K - K @ rmat
    return float(np.abs(lhs - rhs).max())
