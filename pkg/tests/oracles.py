"""Independent reference computations used by the tests.

Nothing here imports the package's formulas. Region probabilities come from
nested quadrature over the raw inequalities; conditional densities are
written out factor by factor from the region integrals; SIR integrals use
mpmath.
"""
import math

import mpmath as mp
from scipy import integrate

mp.mp.dps = 30


def rayleigh_pdf(lam, x):
    return 2 * math.pi * lam * x * math.exp(-math.pi * lam * x * x)


def rayleigh_sf(lam, x):
    return math.exp(-math.pi * lam * x * x)


def region_probability(case_id, lm, ls, eta):
    """P(case) as twice the probability of the subcase with x_1 < x_2, by nested quadrature.

    Each region is integrated over the outer SCell distance with the inner
    integrals written as differences of Rayleigh survival functions.
    """
    r = math.sqrt(eta)
    fm = lambda x: rayleigh_pdf(lm, x)
    sm = lambda x: rayleigh_sf(lm, x)
    s1 = lambda x: rayleigh_sf(ls, x)
    f1 = lambda x: rayleigh_pdf(ls, x)
    inf = math.inf

    if case_id == 1:
        # x_m < x_1 < x_2
        g = lambda xm: fm(xm) * integrate.quad(lambda x1: f1(x1) * s1(x1), xm, inf)[0]
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    if case_id == 2:
        # r x_1 < x_m < x_2
        g = lambda x1: f1(x1) * integrate.quad(lambda xm: fm(xm) * s1(xm), r * x1, inf)[0]
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    if case_id == 3:
        # x_1 < x_m / r < x_2 < x_m
        g = lambda xm: fm(xm) * (1 - s1(xm / r)) * (s1(xm / r) - s1(xm))
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    if case_id == 4:
        # x_1 < x_2 < x_m < r x_1
        def g(x1):
            inner = lambda x2: f1(x2) * (sm(x2) - sm(r * x1))
            return f1(x1) * integrate.quad(inner, x1, r * x1, epsabs=1e-14)[0]
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    if case_id == 5:
        # x_1 < x_m < r x_1 and x_m < x_2
        def g(x1):
            inner = lambda xm: fm(xm) * s1(xm)
            return f1(x1) * integrate.quad(inner, x1, r * x1, epsabs=1e-14)[0]
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    if case_id == 6:
        # x_1 < x_2 < x_m / r
        g = lambda x2: f1(x2) * (1 - s1(x2)) * sm(r * x2)
        return 2 * integrate.quad(g, 0, inf, epsabs=1e-13)[0]
    raise ValueError(case_id)


def region_density(case_id, role, lm, ls, eta):
    """Unnormalized density of the role's distance over the x_1 < x_2 subcase, times 2.

    Built by integrating the joint density over the other two distances
    with explicit survival-function differences; role in {'s1', 's2', 'm'}.
    """
    r = math.sqrt(eta)
    fm = lambda x: rayleigh_pdf(lm, x)
    f1 = lambda x: rayleigh_pdf(ls, x)
    sm = lambda x: rayleigh_sf(lm, x)
    s1 = lambda x: rayleigh_sf(ls, x)
    F1 = lambda x: 1 - s1(x)

    def dens(x):
        if case_id == 3:
            # x_1 < x_m / r < x_2 < x_m
            if role == "s1":
                # x_m > r x_1, x_2 in (x_m / r, x_m)
                return f1(x) * integrate.quad(lambda xm: fm(xm) * (s1(xm / r) - s1(xm)), r * x, math.inf)[0]
            if role == "s2":
                # x_m in (x_2, r x_2), x_1 < x_m / r
                return f1(x) * integrate.quad(lambda xm: fm(xm) * F1(xm / r), x, r * x)[0]
            return fm(x) * F1(x / r) * (s1(x / r) - s1(x))
        if case_id == 4:
            # x_1 < x_2 < x_m < r x_1
            if role == "s1":
                return f1(x) * integrate.quad(lambda x2: f1(x2) * (sm(x2) - sm(r * x)), x, r * x)[0]
            if role == "s2":
                return f1(x) * integrate.quad(lambda x1: f1(x1) * (sm(x) - sm(r * x1)), x / r, x)[0]
            # x_1 in (x_m / r, x_m), x_2 in (x_1, x_m)
            return fm(x) * integrate.quad(lambda x1: f1(x1) * (s1(x1) - s1(x)), x / r, x)[0]
        if case_id == 5:
            # x_1 < x_m < r x_1, x_m < x_2
            if role == "s1":
                return f1(x) * integrate.quad(lambda xm: fm(xm) * s1(xm), x, r * x)[0]
            return fm(x) * s1(x) * (F1(x) - F1(x / r))
        raise ValueError(case_id)

    return lambda x: 2 * dens(x)


# --- stated closed-form densities, transcribed term by term, defects included ---


def stated_pdf(case_id, role, lm, ls, eta, p_case, p_case3=None):
    f1 = lambda x: rayleigh_pdf(ls, x)
    fm = lambda x: rayleigh_pdf(lm, x)
    e = math.exp
    pi = math.pi

    if (case_id, role) == (3, "s1"):
        return lambda x: 2 / p_case * (
            lm * e(-pi * (lm + ls / eta) * x * x) / (lm + ls / eta)
            - lm * e(-pi * (ls + lm) * x * x) / (lm + ls)
        ) * f1(x)
    if (case_id, role) == (3, "s2"):
        a = lm * eta / (ls + lm * eta)
        return lambda x: 2 / p_case * (
            e(-pi * lm * x * x) - e(-pi * lm * eta * x * x)
            - a * e(-pi * (ls / eta + lm) * x * x) + a * e(-pi * (ls + lm * eta) * x * x)
        ) * f1(x)
    if (case_id, role) == (3, "m"):
        return lambda x: 2 / p_case * (e(-pi * ls * x * x / eta) - e(-pi * ls * x * x)) * (
            1 - e(-pi * ls * x * x / eta)) * fm(x)
    if (case_id, role) == (4, "s1"):
        b = ls / (lm + ls)
        return lambda x: 2 / p_case * f1(x) * (
            b * e(-pi * (lm + ls) * x * x) - b * e(-pi * (lm + ls) * eta * x * x)
            - e(-pi * (lm * eta + ls) * x * x) + e(-pi * (lm * eta + ls * eta) * x * x)
        )
    if (case_id, role) == (4, "s2"):
        c = ls / (ls + lm * eta)
        return lambda x: 2 / p_case * f1(x) * (
            e(-pi * (ls / eta + lm) * x * x) - e(-pi * (lm + ls) * x * x)
            + c * e(-pi * (ls + lm * eta) * x * x) - c * e(-pi * (ls / eta + lm) * x * x)
        )
    if (case_id, role) == (4, "m"):
        return lambda x: 2 / p_case3 * (
            0.5 * e(-pi * 2 * ls * x * x / eta) + 0.5 * e(-pi * 2 * ls * x * x)
            - e(-pi * ls * (1 + 1 / eta) * x * x)
        ) * fm(x)
    if (case_id, role) == (5, "s1"):
        return lambda x: 2 * f1(x) / p_case * lm / (ls + lm) * (
            e(-pi * (ls + lm) * x * x) - e(-pi * (ls + lm) * x * x * eta))
    if (case_id, role) == (5, "m"):
        return lambda x: 2 / p_case * e(-pi * ls * x * x) * (e(-pi * ls * x * x / eta) - e(-pi * ls * x * x)) * fm(x)
    raise ValueError((case_id, role))


def stated_case_probability(case_id, lm, ls, eta):
    """Stated closed forms; case 5 is the unrestricted variant."""
    if case_id == 1:
        return lm / (2 * ls + lm)
    if case_id == 2:
        return 2 * ls * lm / ((ls + lm) * (ls + eta * ls + eta * lm))
    if case_id == 3:
        return (2 / (lm + ls / eta) * lm * ls / (lm * eta + 2 * ls)
                - 2 / (lm + ls) * lm * ls / (eta * lm + ls * eta + ls))
    if case_id == 4:
        return 2 * (ls**2 / (lm + ls) * (1 / (lm + 2 * ls) - 1 / (lm * eta + ls + eta * ls))
                    - ls / (lm * eta + 2 * ls) + ls / (lm * eta + ls * eta + ls))
    if case_id == 5:
        return 2 * (ls / (ls + lm) - ls / (lm * eta + ls)) - stated_case_probability(4, lm, ls, eta)
    if case_id == 6:
        return 2 * ls**2 / ((lm * eta + ls) * (lm * eta + 2 * ls))
    raise ValueError(case_id)


# --- SIR integrals with mpmath -----------------------------------------------------


def k_alpha_mp(alpha):
    h = mp.mpf(alpha) / 2
    # tail over [1, inf) through v = w**(-q), q = 1/(h-1), which leaves a smooth integrand on [0, 1]
    q = 1 / (h - 1)
    return mp.quad(lambda v: 1 / (1 + v**h), [0, 1]) + mp.quad(lambda w: q / (w ** (q * h) + 1), [0, 1])


def sir_ccdf_mp(density, lam_i, alpha, theta, upper):
    """P(SIR > theta) = int f(x) exp(-pi lam_i K theta^(2/alpha) x^2) dx."""
    c = mp.pi * lam_i * k_alpha_mp(alpha) * mp.mpf(theta) ** (mp.mpf(2) / alpha)
    return mp.quad(lambda x: density(float(x)) * mp.exp(-c * x * x), mp.linspace(0, upper, 8))


def spectral_efficiency_from_ccdf(ccdf_of_theta, t_max=80):
    """(1/ln 2) int_0^inf P(SIR > e^t - 1) dt, truncated at t_max."""
    return mp.quad(lambda t: ccdf_of_theta(mp.expm1(t)), [0, 2, 8, 20, t_max]) / mp.log(2)


def integrand_pdf(case_id, role, lm, ls, eta, p_case):
    """Density read off the stated CDF integrands, which differ from the
    stated densities for case 3 / SCell 1 (exponents) and case 4 / MCell
    (normalizer)."""
    if (case_id, role) == (3, "s1"):
        e = math.exp
        pi = math.pi
        return lambda x: 2 / p_case * (
            lm * e(-pi * (lm * eta + ls) * x * x) / (lm + ls / eta)
            - lm * e(-pi * (ls + lm) * eta * x * x) / (lm + ls)
        ) * rayleigh_pdf(ls, x)
    return stated_pdf(case_id, role, lm, ls, eta, p_case, p_case3=p_case)


def mean_sir_db_mp(density, lam_i, alpha, upper):
    """E[10 log10 SIR] = int_0^inf P(Y > y) dy - int_-inf^0 P(Y < y) dy, tails cut at +-400 dB."""
    ccdf = lambda y: sir_ccdf_mp(density, lam_i, alpha, mp.power(10, y / 10), upper)
    pos = mp.quad(ccdf, [0, 20, 60, 200, 400])
    neg = mp.quad(lambda y: 1 - ccdf(y), [-400, -200, -60, -20, 0])
    return pos - neg
