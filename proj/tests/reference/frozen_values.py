"""Independent reference values for the C++ test suites.

Solves the original two-equation moment systems with mpmath (no 1-D
reductions) and integrates quantile functions numerically. The printed
numbers are frozen into tests/*.cpp; re-run this script when auditing them.
"""
import math

import numpy as np
from mpmath import mp, mpf, exp, log, sqrt, findroot, quad, inf
from scipy import integrate, optimize

mp.dps = 40


def show(name, value):
    print(f"{name:48s} {float(mp.re(value))!r}")


# Mean-one truncated exponential: e^{-w t} = 1 - w.
show("w for t=2", findroot(lambda w: exp(-2 * w) - (1 - w), 0.8))
show("t for w=0.5", -log(mpf("0.5")) / mpf("0.5"))

# Exp(1) functionals.
show("rvar Exp(1) (0.1,0.2)", quad(lambda p: -log(1 - p), [0.1, 0.2]) / mpf("0.1"))
show("tvar Exp(1) 0.5", quad(lambda p: -log(1 - p), [0.5, 1]) / mpf("0.5"))
show("sqrt distortion on Exp(1)", quad(lambda x: exp(-x / 2), [0, inf]))

# Worst-case RVaR over the mean-only family, brute force over w.
al, be = mpf("0.9"), mpf("0.95")
g = lambda w: ((1 - be) * log(1 - w) - (1 - al) * log(1 - al) + w - al) / (w * (be - al))
ws = findroot(lambda w: mp.diff(g, w), (0.92, 0.96), solver="illinois")
show("argmax w (0.9,0.95)", ws)
show("sup rvar mean (0.9,0.95)", g(ws))
show("sup tvar mean 0.95", 1 - log(mpf("0.05")))


def mv_system(mu2):
    sig = sqrt(mu2 - 1)
    # GT1: S = e^{-a x} on [0, T1).
    def eqs(a, T1):
        m1 = (1 - exp(-a * T1)) / a
        m2 = 2 * quad(lambda x: x * exp(-a * x), [0, T1])
        return [m1 - 1, m2 - mu2]
    a, T1 = findroot(eqs, (0.8, 2.0))
    return sig, a, T1


def g1(mu2, T, guess):
    def eqs(k, D):
        m1 = D + (1 - exp(-k * (T - D))) / k
        m2 = D ** 2 + 2 * quad(lambda x: x * exp(-k * (x - D)), [D, T])
        return [m1 - 1, m2 - mu2]
    return findroot(eqs, guess)


def g2(mu2, T, guess):
    def eqs(k1, k2):
        m1 = (1 - exp(-k1 * T)) / k1 + exp(-k1 * T) / k2
        m2 = 2 * (quad(lambda x: x * exp(-k1 * x), [0, T])
                  + exp(-k1 * T) * (T / k2 + 1 / k2 ** 2))
        return [m1 - 1, m2 - mu2]
    return findroot(eqs, guess)


mu2 = mpf("1.5")
sig, a, T1 = mv_system(mu2)
show("gt1 a (mu2=1.5)", a)
show("gt1 T1 (mu2=1.5)", T1)
k, D = g1(mu2, mpf(3), (1.2, 0.2))
show("g1 k (mu2=1.5,T=3)", k)
show("g1 delta (mu2=1.5,T=3)", D)
T0 = 1 - sig
Tmid = (T0 + T1) / 2
k1, k2 = g2(mu2, Tmid, (0.4, 1.5))
show("g2 T mid (mu2=1.5)", Tmid)
show("g2 k1 (mu2=1.5,T=mid)", k1)
show("g2 k2 (mu2=1.5,T=mid)", k2)

# ---------------------------------------------------------------------------
# Brute-force sweeps over the mean-variance families in double precision,
# using scipy root finding on the two-equation systems.


def g1_params(mu2, T, guess):
    def eqs(p):
        k, D = p
        L = T - D
        m1 = D + (1 - math.exp(-k * L)) / k
        m2 = D * D + 2 * (D * (1 - math.exp(-k * L)) / k
                          + (1 - math.exp(-k * L) * (1 + k * L)) / k ** 2)
        return [m1 - 1, m2 - mu2]
    sol = optimize.root(eqs, guess, tol=1e-14)
    return sol.x


def phi2(z):
    # (1 - e^{-z}(1 + z)) / z^2 without cancellation for small z.
    if z < 0.5:
        return sum((-z) ** k / (math.factorial(k) * (k + 2)) for k in range(30))
    return (1 - math.exp(-z) * (1 + z)) / z ** 2


def g2_params(mu2, T, guess):
    # Eliminate k2 through the mean equation, then scan k1 for a sign change of the
    # second-moment residual and polish with brentq.
    def tail(k1):
        return (1 + T * math.expm1(-k1 * T) / (k1 * T)) * math.exp(k1 * T) if k1 > 0 else 1 - T

    def resid(k1):
        b = tail(k1)
        e = math.exp(-k1 * T)
        head = T * T * phi2(k1 * T)
        return 2 * (head + e * (T * b + b * b)) - mu2

    # Below k_min the tail mass would be negative; k_min solves e^{-kT} = 1 - k when T > 1.
    kmin = 0.0
    if T > 1:
        kmin = optimize.brentq(lambda w: math.exp(-w * T) - (1 - w), 1e-12, 1 - 1e-15, xtol=1e-16)
    ks = kmin + np.logspace(-15, math.log10(5.0), 4000)
    for lo, hi in zip(ks[:-1], ks[1:]):
        if tail(lo) > 0 and tail(hi) > 0 and resid(lo) * resid(hi) <= 0:
            k1 = optimize.brentq(resid, lo, hi, xtol=1e-15, rtol=1e-15)
            return k1, 1 / tail(k1)
    raise RuntimeError(f"no g2 root at T={T}")


def check_moments(q, mu2, kink):
    # q is the quantile as a function of v.
    # E[X^r] = integral of Q(p)^r dp, computed in v = -ln(1 - p) to tame the tail.
    f1 = lambda v: q(v) * math.exp(-v)
    f2 = lambda v: q(v) ** 2 * math.exp(-v)
    m1 = sum(integrate.quad(f1, a, b, limit=800, epsabs=1e-13)[0] for a, b in ((0, kink), (kink, 80)))
    m2 = sum(integrate.quad(f2, a, b, limit=800, epsabs=1e-13)[0] for a, b in ((0, kink), (kink, 80)))
    assert abs(m1 - 1) < 1e-7 and abs(m2 - mu2) < 1e-7, (m1, m2)


def qv_g1(v, T, k, D):
    return min(D + v / k, T)


def qv_g2(v, T, k1, k2):
    return v / k1 if v <= k1 * T else T + (v - k1 * T) / k2


def q_g1(p, T, k, D):
    return qv_g1(-math.log1p(-p), T, k, D)


def q_g2(p, T, k1, k2):
    return qv_g2(-math.log1p(-p), T, k1, k2)


def rvar(q, al, be):
    val, _ = integrate.quad(q, al, be, limit=400, epsabs=1e-13, epsrel=1e-12)
    return val / (be - al)


def sweep(mu2, al, be, n=600):
    sig = math.sqrt(mu2 - 1)
    _, a_, T1_ = mv_system(mpf(mu2))
    a_, T1_ = float(a_), float(T1_)
    T0_ = 1 - sig
    vals = []
    guess = (a_, 1e-9)
    # G1 over u = T1/T in (0, 1]
    for u in np.linspace(1.0, 1e-4, n):
        T = T1_ / u
        k, D = g1_params(mu2, T, guess)
        guess = (k, D)
        check_moments(lambda v: qv_g1(v, T, k, D), mu2, k * (T - D))
        vals.append(rvar(lambda p: q_g1(p, T, k, D), al, be))
    # shifted exponential (T = infinity)
    vals.append(rvar(lambda p: q_g1(p, math.inf, 1 / sig, T0_), al, be))
    guess = (1e-9, 1 / sig)
    for T in np.linspace(T0_ + 1e-9, T1_ - 1e-3, n):
        k1, k2 = g2_params(mu2, T, guess)
        check_moments(lambda v: qv_g2(v, T, k1, k2), mu2, k1 * T)
        vals.append(rvar(lambda p: q_g2(p, T, k1, k2), al, be))
    return max(vals), min(vals)


for (al_, be_) in [(0.5, 0.9), (0.9, 0.999999999)]:
    hi, lo = sweep(1.5, al_, be_)
    show(f"brute sup rvar mv mu2=1.5 ({al_},{be_})", hi)
    show(f"brute inf rvar mv mu2=1.5 ({al_},{be_})", lo)
