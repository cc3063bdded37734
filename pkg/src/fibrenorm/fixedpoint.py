"""Newton collocation for the renormalization fixed point.

Both classes share one functional equation for the diffeomorphism factor E
(phi = E^l, normalized by E(0) = 1):

    E(y) = alpha^2 * E(G(y)),   G(y) = phi(y/tau)/tau,   alpha^l = tau,

which is the unfolded form g_0 = alpha o g_{-1} o g_0 o alpha^{-1} written in
the folded coordinate.  Covers and commuting pairs are different solutions;
the pair is singled out by the commutation f_+ o f_- = f_- o f_+ at the
junction x_l/tau of the two branch domains, which the cover violates.

E is a Chebyshev series on a domain [a, b] holding x_l and tau*x_l.  Outside
the domain E is continued through the same relation.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import mpmath as mp

from .errors import ConvergenceError, DomainError
from .precision import decimal_str, to_mpf, workdps

SCHEMA = "fibrenorm.fixedpoint/1"
MAX_HALVINGS = 20
log = logging.getLogger(__name__)


def pw(t, ell):
    """sign(t)|t|^l."""
    if t == 0:
        return mp.mpf(0)
    return mp.sign(t) * abs(t) ** ell


def oddroot(y, ell):
    """Real root y^(1/l) with the sign of y."""
    if y == 0:
        return mp.mpf(0)
    return mp.sign(y) * abs(y) ** (mp.mpf(1) / ell)


# --------------------------------------------------------------------------
# Chebyshev series


class ChebyshevSeries:
    """sum_k c_k T_k(t), t = (2x - a - b)/(b - a)."""

    __slots__ = ("a", "b", "coeffs")

    def __init__(self, a, b, coeffs):
        self.a = to_mpf(a)
        self.b = to_mpf(b)
        self.coeffs = [to_mpf(c) for c in coeffs]

    def __len__(self):
        return len(self.coeffs)

    def _t(self, x):
        return (2 * x - self.a - self.b) / (self.b - self.a)

    def __call__(self, x):
        t = self._t(x)
        b1 = b2 = mp.mpf(0)
        for ck in reversed(self.coeffs[1:]):
            b1, b2 = 2 * t * b1 - b2 + ck, b1
        return t * b1 - b2 + self.coeffs[0]

    def basis(self, x, n=None):
        """[T_0(t), ..., T_{n-1}(t)] at x."""
        n = len(self.coeffs) if n is None else n
        t = self._t(x)
        out = [mp.mpf(1), t]
        while len(out) < n:
            out.append(2 * t * out[-1] - out[-2])
        return out[:n]

    def derivative(self) -> "ChebyshevSeries":
        n = len(self.coeffs)
        d = [mp.mpf(0)] * (n + 1)
        for k in range(n - 1, 0, -1):
            d[k - 1] = d[k + 1] + 2 * k * self.coeffs[k]
        d[0] /= 2
        scale = 2 / (self.b - self.a)
        return ChebyshevSeries(self.a, self.b, [scale * c for c in d[: max(n - 1, 1)]])

    def with_coeffs(self, coeffs) -> "ChebyshevSeries":
        return ChebyshevSeries(self.a, self.b, coeffs)

    def tail(self, count: int = 3):
        return max(abs(c) for c in self.coeffs[-count:])

    def contains(self, x, slack=0) -> bool:
        return self.a - slack <= x <= self.b + slack

    @staticmethod
    def nodes(a, b, n: int) -> list:
        a, b = to_mpf(a), to_mpf(b)
        return [(a + b) / 2 + (b - a) / 2 * mp.cos(mp.pi * (i + mp.mpf(1) / 2) / n) for i in range(n)]

    @classmethod
    def fit(cls, f, a, b, n: int, oversample: int = 1) -> "ChebyshevSeries":
        """Discrete Chebyshev projection from m = n*oversample nodes.

        With oversample = 1 this is interpolation; larger m gives the
        discrete least-squares fit of degree n - 1.
        """
        m = n * oversample
        xs = cls.nodes(a, b, m)
        fs = [f(x) for x in xs]
        coeffs = []
        for k in range(n):
            s = mp.fsum(fs[i] * mp.cos(mp.pi * k * (i + mp.mpf(1) / 2) / m) for i in range(m))
            coeffs.append(2 * s / m)
        coeffs[0] /= 2
        return cls(a, b, coeffs)


# --------------------------------------------------------------------------
# residuals


@dataclass(frozen=True)
class ResidualVector:
    node_points: tuple
    residuals: tuple
    norm: object
    flagged: tuple = ()

    @classmethod
    def build(cls, points, values, flagged=()):
        values = tuple(values)
        return cls(tuple(points), values, max(abs(v) for v in values), tuple(flagged))


def _split(candidate):
    return list(candidate[:-1]), candidate[-1]


def _equation_rows(E: ChebyshevSeries, tau, ell, nodes):
    """E(y) - alpha^2 E(G(y)) at the nodes, plus the indices that left the domain."""
    al2 = oddroot(tau, ell) ** 2
    rows, flagged = [], []
    slack = (E.b - E.a) * mp.mpf("0.05")
    for i, y in enumerate(nodes):
        g = pw(E(y / tau), ell) / tau
        if not E.contains(g, slack):
            flagged.append(i)
        rows.append(E(y) - al2 * E(g))
    return rows, flagged


def residual_cover(candidate, nodes, ell, domain) -> ResidualVector:
    """Collocation residual of the fixed-point equation; first row is E(0) - 1."""
    coeffs, tau = _split(candidate)
    E = ChebyshevSeries(domain[0], domain[1], coeffs)
    rows, flagged = _equation_rows(E, tau, ell, nodes)
    return ResidualVector.build([mp.mpf(0)] + list(nodes), [E(0) - 1] + rows, [i + 1 for i in flagged])


def commutator_rows(E: ChebyshevSeries, tau, ell, points):
    """l-th root of f_+(f_-(x)) - f_-(f_+(x)) in E form.

    f_+ = phi, f_- = tau*phi(./tau); the root of f_+ o f_- is E(f_-(x)) and
    that of f_- o f_+ is alpha*E(phi(x)/tau).
    """
    al = oddroot(tau, ell)
    out = []
    for x in points:
        f_minus = tau * pw(E(x / tau), ell)
        f_plus = pw(E(x), ell)
        out.append(E(f_minus) - al * E(f_plus / tau))
    return out


def residual_pair(candidate, nodes, ell, domain, junction_points) -> ResidualVector:
    """Fixed-point rows plus commutator rows at points near the junction x_l/tau."""
    coeffs, tau = _split(candidate)
    E = ChebyshevSeries(domain[0], domain[1], coeffs)
    rows, flagged = _equation_rows(E, tau, ell, nodes)
    comm = commutator_rows(E, tau, ell, junction_points)
    pts = [mp.mpf(0)] + list(nodes) + list(junction_points)
    return ResidualVector.build(pts, [E(0) - 1] + rows + comm, [i + 1 for i in flagged])


# --------------------------------------------------------------------------
# fixed-point object


@dataclass
class FixedPointMap:
    kind: str
    exponent: object
    tau: object
    E: ChebyshevSeries
    x_c: object
    X: object
    precision: int
    residual_norm: object = None
    iterations: int = 0
    converged: bool = False
    info: dict = field(default_factory=dict)

    @property
    def alpha(self):
        return oddroot(self.tau, self.exponent)

    @property
    def E_coeffs(self):
        return list(self.E.coeffs)

    @property
    def domain(self):
        return (self.E.a, self.E.b)

    def E_ext(self, x, depth: int = 0):
        """E with continuation E(x) = alpha^2 E(G(x)) outside the fitted domain."""
        x = to_mpf(x)
        if self.E.contains(x):
            return self.E(x)
        if depth > 200:
            raise DomainError(f"continuation of E does not reach the domain from x = {mp.nstr(x, 8)}")
        inner = self.E_ext(x / self.tau, depth + 1)
        return self.alpha ** 2 * self.E_ext(pw(inner, self.exponent) / self.tau, depth + 1)

    def phi(self, x):
        return pw(self.E_ext(x), self.exponent)

    def dphi(self, x):
        x = to_mpf(x)
        if self.E.contains(x):
            e = self.E(x)
            return self.exponent * abs(e) ** (self.exponent - 1) * self._dE(x)
        return mp.diff(self.phi, x)

    def _dE(self, x):
        if "dE" not in self.info:
            self.info["dE"] = self.E.derivative()
        return self.info["dE"](x)

    def phi_minus(self, x):
        """f_- = tau*phi(x/tau)."""
        return self.tau * self.phi(to_mpf(x) / self.tau)

    def G(self, x):
        return self.phi(to_mpf(x) / self.tau) / self.tau

    def dG(self, x):
        return self.dphi(to_mpf(x) / self.tau) / self.tau ** 2

    def to_dict(self, digits: int | None = None) -> dict:
        digits = digits or self.precision
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "exponent": decimal_str(to_mpf(self.exponent), digits),
            "precision": self.precision,
            "tau": decimal_str(self.tau, digits),
            "alpha": decimal_str(self.alpha, digits),
            "x_c": decimal_str(self.x_c, digits),
            "X": decimal_str(self.X, digits) if self.X is not None else None,
            "domain": [decimal_str(self.E.a, digits), decimal_str(self.E.b, digits)],
            "E_coeffs": [decimal_str(c, digits) for c in self.E.coeffs],
            "residual_norm": decimal_str(self.residual_norm, 6) if self.residual_norm is not None else None,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FixedPointMap":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unexpected schema {d.get('schema')!r}")
        prec = int(d["precision"])
        with workdps(prec):
            ell = mp.mpf(d["exponent"])
            if ell == int(ell):
                ell = int(ell)
            E = ChebyshevSeries(mp.mpf(d["domain"][0]), mp.mpf(d["domain"][1]), [mp.mpf(c) for c in d["E_coeffs"]])
            return cls(
                kind=d["kind"], exponent=ell, tau=mp.mpf(d["tau"]), E=E, x_c=mp.mpf(d["x_c"]),
                X=mp.mpf(d["X"]) if d.get("X") else None, precision=prec,
                residual_norm=mp.mpf(d["residual_norm"]) if d.get("residual_norm") else None,
                iterations=int(d.get("iterations", 0)), converged=bool(d.get("converged")),
            )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --------------------------------------------------------------------------
# Newton


def default_domain(kind: str, x_c, tau, gap=None):
    """Collocation interval around [x_c, tau*x_c] (cover) or [x_c, 1/tau] (pair)."""
    x_c, tau = to_mpf(x_c), to_mpf(tau)
    if kind == "cover":
        margin = mp.mpf("0.2") * abs(x_c)
        if gap is not None:
            margin = min(margin, mp.mpf("0.3") * abs(gap))
        return x_c - margin, tau * x_c * mp.mpf("1.18")
    a = x_c * mp.mpf("1.13")
    return a, mp.mpf("1.05") * a / tau


def monotone_window(kind, domain, x_c, tau):
    """Where E must be increasing.

    A cover's E has a critical point of order l at tau*x_c (E' = alpha^2
    E'(G) G' and G'(tau*x_c) = 0), so the check stops short of it.
    """
    if kind == "cover":
        return domain[0], min(domain[1], to_mpf(tau) * to_mpf(x_c) * mp.mpf("0.97"))
    return domain


@dataclass
class CollocationProblem:
    kind: str
    ell: object
    domain: tuple
    basis: int
    junction: tuple = ()
    monotone_window: tuple | None = None

    def __post_init__(self):
        self.nodes = ChebyshevSeries.nodes(self.domain[0], self.domain[1], self.basis)
        if self.monotone_window is None:
            self.monotone_window = self.domain

    def residual(self, u) -> ResidualVector:
        if self.kind == "pair" and self.junction:
            return residual_pair(u, self.nodes, self.ell, self.domain, self.junction)
        return residual_cover(u, self.nodes, self.ell, self.domain)

    def jacobian(self, u):
        """Exact derivative of the equation rows; tau column and commutator rows by central differences."""
        coeffs, tau = _split(u)
        ell = self.ell
        E = ChebyshevSeries(self.domain[0], self.domain[1], coeffs)
        dE = E.derivative()
        al2 = oddroot(tau, ell) ** 2
        n = len(coeffs)
        rows = [E.basis(mp.mpf(0), n) + [mp.mpf(0)]]
        for y in self.nodes:
            e_in = E(y / tau)
            g = pw(e_in, ell) / tau
            dg_de = ell * abs(e_in) ** (ell - 1) / tau
            ty, tg, tin = E.basis(y, n), E.basis(g, n), E.basis(y / tau, n)
            slope = al2 * dE(g) * dg_de
            rows.append([ty[k] - al2 * tg[k] - slope * tin[k] for k in range(n)] + [None])
        h = mp.mpf(10) ** (-(mp.mp.dps // 3))
        extra = len(self.junction) if (self.kind == "pair" and self.junction) else 0
        up = list(u)
        up[-1] = tau + h
        dn = list(u)
        dn[-1] = tau - h
        r_up, r_dn = self.residual(up).residuals, self.residual(dn).residuals
        for i in range(1, len(rows)):
            rows[i][-1] = (r_up[i] - r_dn[i]) / (2 * h)
        if extra:
            rows.extend([None] * (n + 1) for _ in range(extra))
            for k in range(n + 1):
                up, dn = list(u), list(u)
                up[k] += h
                dn[k] -= h
                cu = commutator_rows(ChebyshevSeries(E.a, E.b, up[:-1]), up[-1], ell, self.junction)
                cd = commutator_rows(ChebyshevSeries(E.a, E.b, dn[:-1]), dn[-1], ell, self.junction)
                for j in range(extra):
                    rows[len(rows) - extra + j][k] = (cu[j] - cd[j]) / (2 * h)
        return mp.matrix(rows)


def central_difference_jacobian(residual_fn, u, h=None):
    """Jacobian of residual_fn by central differences, step tied to the working precision."""
    h = h or mp.mpf(10) ** (-(mp.mp.dps // 3))
    cols = []
    for k in range(len(u)):
        up, dn = list(u), list(u)
        up[k] += h
        dn[k] -= h
        ru, rd = residual_fn(up).residuals, residual_fn(dn).residuals
        cols.append([(a - b) / (2 * h) for a, b in zip(ru, rd)])
    J = mp.matrix(len(cols[0]), len(u))
    for k, col in enumerate(cols):
        for i, v in enumerate(col):
            J[i, k] = v
    return J


def _monotone(coeffs, domain, window, grid: int = 64) -> bool:
    """E' > 0 on the window, up to the derivative's truncation error."""
    E = ChebyshevSeries(domain[0], domain[1], coeffs)
    dE = E.derivative()
    slack = 10 * len(coeffs) ** 2 * E.tail() * 2 / (E.b - E.a)
    return all(dE(x) > -slack for x in ChebyshevSeries.nodes(window[0], window[1], grid))


def _condition_estimate(J):
    try:
        return mp.norm(J, 1) * mp.norm(mp.inverse(J), 1)
    except ZeroDivisionError:
        return mp.inf


def newton_solve(problem: CollocationProblem, seed, max_iter: int = 30, tol=None,
                 jacobian: str = "central", monotone_check: bool = True):
    """Damped Newton (Gauss-Newton when rows outnumber unknowns) on coefficients and tau.

    ``jacobian`` is "central" (finite differences) or "exact" (the
    structure of the equation rows).  Returns (u, ResidualVector, iterations);
    raises ConvergenceError on singular Jacobian, monotonicity loss or
    divergence.
    """
    tol = to_mpf(tol) if tol is not None else mp.mpf(10) ** (-(mp.mp.dps - 12))
    u = [to_mpf(x) for x in seed]
    res = problem.residual(u)
    if not mp.isfinite(res.norm):
        raise ConvergenceError("seed residual is not finite")
    stall = 0
    for it in range(max_iter + 1):
        if res.norm < tol:
            return u, res, it
        if it == max_iter:
            break
        J = problem.jacobian(u) if jacobian == "exact" else central_difference_jacobian(problem.residual, u)
        r = mp.matrix(list(res.residuals))
        try:
            if J.rows == J.cols:
                du = mp.lu_solve(J, r)
            else:
                du = mp.qr_solve(J, r)[0]
        except ZeroDivisionError:
            raise ConvergenceError(f"singular Jacobian (condition ~ {mp.nstr(_condition_estimate(J), 3)})")
        lam = mp.mpf(1)
        for _ in range(MAX_HALVINGS):
            trial = [u[i] - lam * du[i] for i in range(len(u))]
            ok = not monotone_check or _monotone(trial[:-1], problem.domain, problem.monotone_window)
            if ok:
                try:
                    tres = problem.residual(trial)
                    if tres.norm < res.norm:
                        break
                except (ValueError, ZeroDivisionError, DomainError):
                    pass
            lam /= 2
        else:
            if J.rows != J.cols:
                # least-squares floor reached: the residual cannot drop further
                return u, res, it
            raise ConvergenceError(f"no descent after step halving (residual {mp.nstr(res.norm, 3)})")
        if res.norm - tres.norm < res.norm * mp.mpf("1e-3"):
            stall += 1
        else:
            stall = 0
        u, res = trial, tres
        if stall >= 3 and J.rows != J.cols:
            return u, res, it + 1
    raise ConvergenceError(f"no convergence after {max_iter} iterations (residual {mp.nstr(res.norm, 3)})")


# --------------------------------------------------------------------------
# seeds and derived quantities


def seed_from_dynamics(pair, ell, kind: str = "pair", basis: int = 24, tau=None,
                       domain=None, fit_tol=1e-2):
    """Least-squares Chebyshev fit of E = A^(1/l) from a renormalized level.

    ``pair`` is a RenormalizedPair; tau defaults to its level ratio.  Returns
    (candidate, domain, x_c) with candidate = coeffs + [tau].
    """
    st = pair.state
    tau = to_mpf(tau) if tau is not None else st.tau_estimate
    x_c = st.interval_In.left / st.s
    if domain is None:
        domain = default_domain(kind, x_c, tau)

    def sample(z):
        return oddroot(pair.central(z), ell)

    series = ChebyshevSeries.fit(sample, domain[0], domain[1], basis, oversample=2)
    check = [domain[0] + (domain[1] - domain[0]) * k / 37 for k in range(38)]
    err = max(abs(series(z) - sample(z)) for z in check)
    if err > fit_tol:
        raise ConvergenceError(f"seed fit residual {mp.nstr(err, 3)} too large; use a deeper level")
    return series.coeffs + [tau], domain, x_c


def taylor_seed(kind: str, ell):
    """Two-term seed E(y) = 1 - y/x_c from matching the equation to first order at 0.

    Matching value and slope at y = 0 gives x_c = -l*alpha^2/tau^2 and
    |tau|^(2/l) - |tau|/l = 1.  For l = 3 this has two roots: the smaller
    seeds the pair, the larger the cover.  Returns (tau, x_c) or raises
    ConvergenceError when no root exists.
    """
    ell = to_mpf(ell)
    f = lambda t: t ** (2 / ell) - t / ell - 1
    # f peaks where t^(1 - 2/l) = 2
    t_peak = mp.mpf(2) ** (ell / (ell - 2))
    if f(t_peak) <= 0:
        raise ConvergenceError(f"no first-order seed for exponent {ell}")
    if kind == "pair":
        t = mp.findroot(f, (mp.mpf("1.0000001"), t_peak), solver="bisect") if f(mp.mpf("1.0000001")) < 0 else None
        if t is None:
            raise ConvergenceError("no pair root")
    else:
        hi = t_peak * 2
        while f(hi) > 0:
            hi *= 2
        t = mp.findroot(f, (t_peak, hi), solver="bisect")
    tau = -t
    x_c = -ell * abs(tau) ** (2 / ell) / tau ** 2
    return tau, x_c


def _bisect(f, lo, hi, tol=None):
    tol = tol or mp.mpf(10) ** (-(mp.mp.dps - 5))
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if (flo > 0) == (fhi > 0):
        raise DomainError("root not bracketed")
    for _ in range(4 * mp.mp.prec):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0 or hi - lo < tol * max(1, abs(mid)):
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def _root(f, df, lo, hi):
    """Bisection to a narrow bracket, then Newton polish."""
    with workdps(mp.mp.dps):
        x = _bisect(f, lo, hi, mp.mpf(10) ** (-(mp.mp.dps // 2)))
        for _ in range(8):
            d = df(x)
            if d == 0:
                break
            step = f(x) / d
            x -= step
            if abs(step) < mp.mpf(10) ** (-(mp.mp.dps - 3)) * max(1, abs(x)):
                break
        return x


def locate_critical(E: ChebyshevSeries, guess, spread=mp.mpf("0.5")):
    """Zero of E near ``guess``, bracketed on [guess*(1+spread), guess*(1-spread)] clipped to the domain."""
    dE = E.derivative()
    lo = max(E.a, guess * (1 + spread))
    hi = min(E.b, guess * (1 - spread))
    if not (E(lo) < 0 < E(hi)):
        xs = ChebyshevSeries.nodes(E.a, min(E.b, mp.mpf(0)), 200)[::-1]
        for u, v in zip(xs, xs[1:]):
            if E(u) < 0 < E(v):
                lo, hi = u, v
                break
        else:
            raise DomainError("E has no sign change on the negative part of the domain")
    return _root(E, dE, lo, hi)


def locate_X(fp: FixedPointMap):
    """Unique X in (1/tau, 0) with phi(X) = tau*X."""
    f = lambda x: fp.phi(x) - fp.tau * x
    lo, hi = 1 / fp.tau, mp.mpf(0)
    return _root(f, lambda x: fp.dphi(x) - fp.tau, lo, hi)


def fixed_points_of_G(fp: FixedPointMap, lo=None, hi=None, samples: int = 400):
    """Real fixed points of G on [lo, hi] with their multipliers G'.

    Default window runs from tau*phi(x_c/tau^2) minus a margin up to x_c;
    sign changes of G(x) - x on a grid are refined by bisection.
    """
    if lo is None or hi is None:
        gam = fp.tau * fp.phi(fp.x_c / fp.tau ** 2)
        span = abs(fp.x_c - gam)
        lo = gam - span / 4 if lo is None else lo
        hi = fp.x_c + abs(fp.x_c) * mp.mpf("0.05") if hi is None else hi
    f = lambda x: fp.G(x) - x
    xs = [lo + (hi - lo) * k / samples for k in range(samples + 1)]
    vals = [f(x) for x in xs]
    out = []
    for i in range(samples):
        if vals[i] == 0:
            out.append(xs[i])
        elif (vals[i] > 0) != (vals[i + 1] > 0):
            out.append(_root(f, lambda x: fp.dG(x) - 1, xs[i], xs[i + 1]))
    return [(x, fp.dG(x)) for x in out]


def schwarzian(series: ChebyshevSeries, x):
    d1 = series.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    e1, e2, e3 = d1(x), d2(x), d3(x)
    return e3 / e1 - mp.mpf(3) / 2 * (e2 / e1) ** 2


@dataclass
class IdentityReport:
    errors: dict
    ordering: bool
    schwarzian_max: object
    multipliers: list
    ok: bool = False

    def worst(self):
        return max(self.errors.values())

    def lines(self):
        out = [f"{k:>24s}  {mp.nstr(v, 3)}" for k, v in self.errors.items()]
        out.append(f"{'ordering 1<tau*x_c<tau^2':>24s}  {self.ordering}")
        out.append(f"{'max Schwarzian(E)':>24s}  {mp.nstr(self.schwarzian_max, 3)}")
        return out


def verify_identities(fp: FixedPointMap, grid: int = 200, tol=1e-8) -> IdentityReport:
    """Absolute errors of the exact identities a converged fixed point satisfies."""
    with workdps(fp.precision):
        tau, ell, x_c = fp.tau, fp.exponent, fp.x_c
        errs = {
            "phi(0)-1": abs(fp.phi(0) - 1),
            "phi(1/tau)-1/tau^2": abs(fp.phi(1 / tau) - 1 / tau ** 2),
            "phi'(1/tau)-1": abs(fp.dphi(1 / tau) - 1),
            "phi(x_c/tau)-tau*x_c": abs(fp.phi(x_c / tau) - tau * x_c),
        }
        a, b = fp.E.a, fp.E.b
        pts = [a + (b - a) * k / (grid - 1) for k in range(grid)]
        errs["sup|phi(G)-phi/tau^2|"] = max(abs(fp.phi(fp.G(x)) - fp.phi(x) / tau ** 2) for x in pts)
        if fp.kind == "cover":
            errs["G'(x_c)-alpha^-2"] = abs(fp.dG(x_c) - fp.alpha ** -2)
        else:
            errs["Gamma(x_c)-x_c"] = abs(tau * fp.phi(x_c / tau ** 2) - x_c)
        ordering = bool(1 < tau * x_c < tau ** 2)
        win = monotone_window(fp.kind, (a, b), x_c, tau)
        sgrid = ChebyshevSeries.nodes(win[0], win[1], grid)
        s_max = max(schwarzian(fp.E, x) for x in sgrid)
        mults = []
        if fp.kind == "cover":
            mults = fixed_points_of_G(fp)
        rep = IdentityReport(errs, ordering, s_max, mults)
        rep.ok = ordering and all(v < tol for v in errs.values())
        return rep


# --------------------------------------------------------------------------
# drivers


def _finish(kind, ell, u, domain, res, its, precision, guess_xc, jacobian):
    coeffs, tau = _split(u)
    E = ChebyshevSeries(domain[0], domain[1], coeffs)
    x_c = locate_critical(E, guess_xc)
    fp = FixedPointMap(kind, ell, tau, E, x_c, None, precision, res.norm, its, True,
                       {"jacobian": jacobian, "flagged": res.flagged})
    try:
        fp.X = locate_X(fp)
    except DomainError:
        fp.X = None
    return fp


def junction_points(x_c, tau, count: int = 3, width=mp.mpf("0.1")):
    j = x_c / tau
    return tuple(j * (1 + width * (k - (count - 1) / 2)) for k in range(count))


def solve_from_seed(kind: str, ell, candidate, domain, x_c_guess, basis: int | None = None,
                    precision: int = 60, jacobian: str = "central", max_iter: int = 30,
                    tol=None, commutators: int | None = None) -> FixedPointMap:
    """Refit the seed onto ``domain`` with ``basis`` terms and run Newton."""
    with workdps(precision):
        coeffs, tau = _split([to_mpf(c) for c in candidate])
        src = ChebyshevSeries(*domain, coeffs) if len(domain) == 2 else domain
        basis = basis or len(coeffs)
        if basis != len(coeffs):
            src = ChebyshevSeries.fit(ChebyshevSeries(domain[0], domain[1], coeffs), domain[0], domain[1], basis)
        junction = ()
        if kind == "pair" and (commutators is None or commutators > 0):
            junction = junction_points(x_c_guess, tau, commutators or 3)
        prob = CollocationProblem(kind, ell, (src.a, src.b), basis, junction,
                                  monotone_window(kind, (src.a, src.b), x_c_guess, tau))
        u, res, its = newton_solve(prob, src.coeffs + [tau], max_iter=max_iter, tol=tol, jacobian=jacobian)
        return _finish(kind, ell, u, (src.a, src.b), res, its, precision, x_c_guess, jacobian)


def refit(fp: FixedPointMap, domain, basis: int) -> list:
    """Candidate on a new domain from fp (continuation outside the old domain)."""
    series = ChebyshevSeries.fit(fp.E_ext, domain[0], domain[1], basis)
    return series.coeffs + [fp.tau]


def multipliers_ok(fp: FixedPointMap, tol=1e-3) -> bool:
    """Cover: the two outer fixed points of G attract with multiplier alpha^-2."""
    if fp.kind != "cover":
        return abs(fp.tau * fp.phi(fp.x_c / fp.tau ** 2) - fp.x_c) < tol
    try:
        fps = fixed_points_of_G(fp)
    except (DomainError, ValueError, ZeroDivisionError):
        return False
    if len(fps) != 3:
        return False
    target = fp.alpha ** -2
    return abs(fps[0][1] - target) < tol and abs(fps[2][1] - target) < tol and fps[1][1] > 1


def _gap(fp: FixedPointMap):
    if fp.kind == "cover" and fp.X is not None:
        return fp.x_c - fp.tau ** 2 * fp.X
    return None


def _predict(cur: FixedPointMap, prev: FixedPointMap | None, theta, basis: int):
    """Secant predictor in the coordinate y/x_c; plain refit without history."""
    if prev is None:
        dom = default_domain(cur.kind, cur.x_c, cur.tau, _gap(cur))
        return refit(cur, dom, basis), dom, cur.x_c
    lin = lambda u, v: u + theta * (u - v)
    tau, x_c = lin(cur.tau, prev.tau), lin(cur.x_c, prev.x_c)
    g1, g0 = _gap(cur), _gap(prev)
    gap = lin(g1, g0) if g1 is not None and g0 is not None else None
    dom = default_domain(cur.kind, x_c, tau, gap)
    r1, r0 = cur.x_c / x_c, prev.x_c / x_c

    def shape(y):
        return (1 + theta) * cur.E_ext(y * r1) - theta * prev.E_ext(y * r0)

    series = ChebyshevSeries.fit(shape, dom[0], dom[1], basis)
    return series.coeffs + [tau], dom, x_c


def continue_in_ell(fp: FixedPointMap, ell_target, step=0.25, basis: int | None = None,
                    precision: int | None = None, jacobian: str = "exact", callback=None,
                    min_step=0.002) -> FixedPointMap:
    """Follow the solution branch in the exponent.

    Steps are secant-predicted, land on every integer exponent on the way,
    shrink when Newton fails or the multiplier check shows a branch jump and
    grow back after successes.  ``callback`` sees every accepted solution.
    """
    precision = precision or fp.precision
    basis = basis or len(fp.E)
    with workdps(precision):
        ell = to_mpf(fp.exponent)
        target = to_mpf(ell_target)
        sgn = 1 if target > ell else -1
        hmax = to_mpf(step)
        h = hmax
        cur, prev, ell_prev = fp, None, None
        while ell != target:
            nxt = ell + sgn * h
            stop = mp.floor(ell) + 1 if sgn > 0 else mp.ceil(ell) - 1
            if sgn * (nxt - stop) > 0:
                nxt = stop
            if sgn * (nxt - target) > 0:
                nxt = target
            ok = False
            try:
                theta = (nxt - ell) / (ell - ell_prev) if prev is not None else 0
                cand, dom, xg = _predict(cur, prev, theta, basis)
                ell_val = int(nxt) if nxt == int(nxt) else nxt
                new = solve_from_seed(cur.kind, ell_val, cand, dom, xg, basis, precision, jacobian)
                ok = multipliers_ok(new)
                if not ok:
                    log.debug("exponent %s: multiplier check failed", mp.nstr(nxt, 6))
            except (ConvergenceError, DomainError, ZeroDivisionError, ValueError) as err:
                log.debug("exponent %s: %s", mp.nstr(nxt, 6), err)
            if not ok:
                h = abs(nxt - ell) / 2
                if h < min_step:
                    raise ConvergenceError(f"continuation stalled at exponent {mp.nstr(ell, 6)}")
                continue
            prev, ell_prev = cur, ell
            cur, ell = new, nxt
            h = min(hmax, h * mp.mpf("1.5"))
            if callback:
                callback(cur)
        return cur


def polish(fp: FixedPointMap, basis: int, precision: int, jacobian: str = "exact",
           right_factor="1.05") -> FixedPointMap:
    """Re-solve ``fp`` with another basis size and working precision.

    For covers the right end of the domain is pulled in to right_factor*tau*x_c,
    which keeps the order-l critical point of E at tau*x_c near the edge and
    speeds up coefficient decay.
    """
    with workdps(precision):
        dom = default_domain(fp.kind, fp.x_c, fp.tau, _gap(fp))
        if right_factor is not None and fp.kind == "cover":
            dom = (dom[0], fp.tau * fp.x_c * to_mpf(right_factor))
        cand = refit(fp, dom, basis)
        return solve_from_seed(fp.kind, fp.exponent, cand, dom, fp.x_c, basis, precision, jacobian)


def anchor(kind: str, basis: int = 24, precision: int = 30, jacobian: str = "exact") -> FixedPointMap:
    """l = 3 solution from the first-order seed."""
    with workdps(precision):
        tau, x_c = taylor_seed(kind, 3)
        if kind == "cover":
            dom = default_domain(kind, x_c, tau)
        else:
            # the first-order pair seed underestimates |x_c| by about 20%
            a = x_c * mp.mpf("1.4")
            dom = (a, mp.mpf("1.05") * a / tau)
        E = ChebyshevSeries.fit(lambda y: 1 - y / x_c, dom[0], dom[1], basis)
        return solve_from_seed(kind, 3, E.coeffs + [tau], dom, x_c, basis, precision, jacobian)


def sweep(kind: str, ells, start: FixedPointMap | None = None, basis: int = 24, precision: int = 30,
          final_basis: int | None = None, final_precision: int | None = None, step=0.25,
          jacobian: str = "exact", progress=None, failures: dict | None = None) -> dict:
    """Fixed points at the integer exponents ``ells`` by continuation from l = 3.

    The path is followed at (basis, precision); each requested exponent is
    then re-solved at (final_basis, final_precision) when those are given.
    A failed re-solve is recorded in ``failures`` and the path goes on; a
    failed continuation step marks every exponent beyond it as failed.
    """
    wanted = sorted(int(e) for e in ells)
    failures = {} if failures is None else failures
    cur = start or anchor(kind, basis, precision, jacobian)
    found = {}

    def keep(fp):
        e = fp.exponent
        if isinstance(e, int) or e == int(e):
            if int(e) in wanted and int(e) not in found and int(e) not in failures:
                out = fp
                if final_basis or final_precision:
                    try:
                        out = polish(fp, final_basis or basis, final_precision or precision, jacobian)
                    except (ConvergenceError, DomainError) as exc:
                        failures[int(e)] = f"polish: {exc}"
                        return
                found[int(e)] = out
                if progress:
                    progress(out)

    keep(cur)
    for e in wanted:
        if e in found or e in failures or e < float(cur.exponent):
            continue
        try:
            cur = continue_in_ell(cur, e, step=step, basis=basis, precision=precision,
                                  jacobian=jacobian, callback=keep)
        except (ConvergenceError, DomainError) as exc:
            for rest in wanted:
                if rest >= e and rest not in found:
                    failures[rest] = f"continuation: {exc}"
            break
    return found
