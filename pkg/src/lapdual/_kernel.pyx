# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler kernel; same algorithm and random stream as ``_pykernel``.

Paths are processed one at a time, each strictly sequential in time, with
the GIL released.
"""

from libc.math cimport cos, exp, expm1, fabs, floor, isfinite, log, pow, sqrt, INFINITY
from libc.stdint cimport int8_t, int64_t, uint64_t

import numpy as np

import math

cdef enum:
    MAX_RATES = 64
    SERIES_TERMS = 40
    CF_MAX_ITER = 500
    POISSON_KMAX = 200

cdef double CF_EPS = 1e-16
cdef double TINY = 1e-300
cdef double POISSON_CHUNK = 8.0
cdef double POISSON_NORMAL = 1e4
cdef double FACT[SERIES_TERMS + 1]
for _k in range(SERIES_TERMS + 1):
    FACT[_k] = float(math.factorial(_k))

cdef uint64_t STEP_MUL = 0xD1B54A32D192ED03ULL
cdef uint64_t SLOT_MUL = 0xABC98388FB8FAC03ULL
cdef uint64_t K_MUL = 0x8CB92BA72F3D8DD7ULL
cdef double TWO_PI = 6.283185307179586
cdef double TO_UNIT = 1.1102230246251565e-16


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t key, uint64_t step, uint64_t slot, uint64_t k) noexcept nogil:
    cdef uint64_t c = step * STEP_MUL + slot * SLOT_MUL + k * K_MUL + 1
    cdef uint64_t z = mix64(key ^ mix64(c))
    return (<double>(z >> 11) + 0.5) * TO_UNIT


cdef inline int64_t poisson_inv(double lam, double u) noexcept nogil:
    cdef double p = exp(-lam)
    cdef double f = p
    cdef int64_t n = 0
    while u > f and n < POISSON_KMAX:
        n += 1
        p *= lam / n
        f += p
    return n


cdef int64_t poisson(double lam, uint64_t key, uint64_t step, uint64_t slot) noexcept nogil:
    # chunked inversion, so that counts are nondecreasing in lam for a
    # fixed stream; a rounded normal beyond POISSON_NORMAL
    cdef int64_t n = 0
    cdef int64_t j, full
    cdef double z
    if lam <= 0.0:
        return 0
    if lam > POISSON_NORMAL:
        z = sqrt(-2.0 * log(uniform(key, step, slot, 0))) * cos(TWO_PI * uniform(key, step, slot, 1))
        return <int64_t>floor(lam + sqrt(lam) * z + 0.5)
    full = <int64_t>floor(lam / POISSON_CHUNK)
    for j in range(full):
        n += poisson_inv(POISSON_CHUNK, uniform(key, step, slot, j))
    return n + poisson_inv(lam - full * POISSON_CHUNK, uniform(key, step, slot, full))


cdef double upper_gamma(double a, double x) noexcept nogil:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / TINY
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef int i
    for i in range(1, CF_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < TINY:
            d = TINY
        c = b + an / c
        if fabs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            break
    return exp(-x + a * log(x)) * h


cdef double series(double y, double alpha, int kmin) noexcept nogil:
    cdef double acc = 0.0
    cdef int k
    for k in range(SERIES_TERMS, kmin - 1, -1):
        acc += 1.0 / (FACT[k] * (k - alpha)) * pow(-y, k)
    return acc


cdef double stable_a(double y, double alpha, double c2, double g1) noexcept nogil:
    cdef double ly, ya, t4
    if y <= 1.0:
        return series(y, alpha, 2)
    if not isfinite(y):
        return INFINITY
    ly = log(y)
    ya = exp(alpha * ly)
    if alpha == 1.0:
        t4 = y * ly
    else:
        t4 = -y * expm1((alpha - 1.0) * ly) / (1.0 - alpha)
    return ya * (c2 + g1 - upper_gamma(-alpha, y)) - expm1(alpha * ly) / alpha + t4


cdef double stable_b(double y, double alpha, double c1, double g1) noexcept nogil:
    cdef double ly
    if y <= 1.0:
        return -series(y, alpha, 1)
    if not isfinite(y):
        return INFINITY
    ly = log(y)
    return exp(alpha * ly) * (c1 - g1 + upper_gamma(-alpha, y)) + expm1(alpha * ly) / alpha


cdef struct Tables:
    int64_t n_rates
    const int64_t* rate_kind
    const int64_t* rate_arg
    const int64_t* mech_kind
    const double* mech_a
    const double* mech_b
    const double* mech_c
    const double* mech_d
    const double* mech_alpha
    const double* mech_scale
    const double* mech_c1
    const double* mech_c2
    const double* mech_g1
    const int64_t* mech_ptr
    const double* atom_loc
    const double* atom_mass
    int64_t n_drift
    const double* drift_coef
    const int64_t* drift_rate
    int64_t n_var
    const double* var_coef
    const int64_t* var_rate
    int64_t n_jump
    const double* jump_size
    const double* jump_mass
    const int64_t* jump_rate
    const int64_t* jump_mult
    int64_t n_stab
    const double* stab_alpha
    const double* stab_mass
    const double* stab_eps
    const int64_t* stab_rate
    const int64_t* stab_mult
    int64_t n_kill
    const double* kill_coef
    const int64_t* kill_rate
    int zero_trap
    int has_mult
    int is_static
    double growth
    double floor
    double cap


cdef double mech_rate(const Tables* T, int64_t i, double x) noexcept nogil:
    cdef int64_t kind = T.mech_kind[i]
    cdef int64_t j
    cdef double out = 0.0
    cdef double u, m, e
    for j in range(T.mech_ptr[i], T.mech_ptr[i + 1]):
        u = T.atom_loc[j]
        m = T.atom_mass[j]
        e = expm1(-u * x)
        if kind == 1:
            out += m * -e
        elif kind == 2 or u <= 1.0:
            out += m * (e + u * x)
        else:
            out += m * e
    if T.mech_scale[i] > 0.0:
        if kind == 1:
            out += T.mech_scale[i] * stable_b(x, T.mech_alpha[i], T.mech_c1[i], T.mech_g1[i])
        else:
            out += T.mech_scale[i] * stable_a(x, T.mech_alpha[i], T.mech_c2[i], T.mech_g1[i])
    if kind == 0:
        out += T.mech_a[i] * x * x - T.mech_b[i] * x - T.mech_c[i]
    elif kind == 1:
        out += T.mech_d[i] * x + T.mech_c[i]
    else:
        out += T.mech_a[i] * x * x + T.mech_d[i] * x
    return out


cdef void step_path(const Tables* T, double* x, int8_t* st, double* clk, double thr,
                    uint64_t key, uint64_t step, double h) noexcept nogil:
    cdef double R[MAX_RATES]
    cdef double xa = x[0]
    cdef double dx = 0.0
    cdef double var, factor, lam, top, size, kinc, new
    cdef int64_t r, c, j, n, k
    cdef int8_t s = 0
    for r in range(T.n_rates):
        if T.rate_kind[r] == 0:
            if T.rate_arg[r] == 0:
                R[r] = 1.0
            elif T.rate_arg[r] == 1:
                R[r] = xa
            else:
                R[r] = xa * xa
        else:
            R[r] = mech_rate(T, T.rate_arg[r], xa)
    for j in range(T.n_drift):
        dx += T.drift_coef[j] * R[T.drift_rate[j]]
    dx *= h
    if T.n_var > 0:
        var = 0.0
        for j in range(T.n_var):
            var += T.var_coef[j] * R[T.var_rate[j]]
        if var < 0.0:
            var = 0.0
        dx += sqrt(var * h) * (sqrt(-2.0 * log(uniform(key, step, 0, 0))) * cos(TWO_PI * uniform(key, step, 0, 1)))
    factor = 1.0
    for c in range(T.n_jump):
        lam = T.jump_mass[c] * R[T.jump_rate[c]] * h
        n = poisson(lam, key, step, 2 + 2 * c)
        if T.jump_mult[c]:
            factor *= pow(1.0 + T.jump_size[c], <double>n)
        else:
            dx += T.jump_size[c] * n
    for j in range(T.n_stab):
        c = T.n_jump + j
        lam = T.stab_mass[j] * R[T.stab_rate[j]] * h
        n = poisson(lam, key, step, 2 + 2 * c)
        top = pow(T.stab_eps[j], -T.stab_alpha[j])
        for k in range(n):
            size = pow(top - uniform(key, step, 3 + 2 * c, k) * (top - 1.0), -1.0 / T.stab_alpha[j])
            if T.stab_mult[j]:
                factor *= 1.0 + size
            else:
                dx += size
    new = xa * T.growth + dx
    if T.has_mult:
        new += xa * (factor - 1.0)
    if T.n_kill > 0:
        kinc = 0.0
        for j in range(T.n_kill):
            kinc += T.kill_coef[j] * R[T.kill_rate[j]]
        if kinc < 0.0:
            kinc = 0.0
        clk[0] += kinc * h
        if clk[0] >= thr:
            s = 2
    if s == 0 and not (new < T.cap):
        s = 3
    if s == 0 and new <= T.floor:
        if T.zero_trap:
            s = 1
            new = 0.0
        elif new < 0.0:
            new = 0.0
    if s >= 2:
        new = INFINITY
    x[0] = new
    st[0] = s


def advance(plan, double[::1] x, int8_t[::1] st, double[::1] clock, const double[::1] thr,
            const uint64_t[::1] keys, int64_t step0, int64_t n_steps, double h,
            const int64_t[::1] snaps, double[:, ::1] out_x, int8_t[:, ::1] out_st):
    """Advance all paths in place; see ``_pykernel.advance``."""
    cdef Tables T
    cdef Py_ssize_t i, n = x.shape[0]
    cdef int64_t k, j, nsnap = snaps.shape[0]

    arrays = _tables(plan)
    cdef const int64_t[::1] rate_kind = arrays["rate_kind"]
    cdef const int64_t[::1] rate_arg = arrays["rate_arg"]
    cdef const int64_t[::1] mech_kind = arrays["mech_kind"]
    cdef const double[::1] mech_a = arrays["mech_a"]
    cdef const double[::1] mech_b = arrays["mech_b"]
    cdef const double[::1] mech_c = arrays["mech_c"]
    cdef const double[::1] mech_d = arrays["mech_d"]
    cdef const double[::1] mech_alpha = arrays["mech_alpha"]
    cdef const double[::1] mech_scale = arrays["mech_scale"]
    cdef const double[::1] mech_c1 = arrays["mech_c1"]
    cdef const double[::1] mech_c2 = arrays["mech_c2"]
    cdef const double[::1] mech_g1 = arrays["mech_g1"]
    cdef const int64_t[::1] mech_ptr = arrays["mech_ptr"]
    cdef const double[::1] atom_loc = arrays["atom_loc"]
    cdef const double[::1] atom_mass = arrays["atom_mass"]
    cdef const double[::1] drift_coef = arrays["drift_coef"]
    cdef const int64_t[::1] drift_rate = arrays["drift_rate"]
    cdef const double[::1] var_coef = arrays["var_coef"]
    cdef const int64_t[::1] var_rate = arrays["var_rate"]
    cdef const double[::1] jump_size = arrays["jump_size"]
    cdef const double[::1] jump_mass = arrays["jump_mass"]
    cdef const int64_t[::1] jump_rate = arrays["jump_rate"]
    cdef const int64_t[::1] jump_mult = arrays["jump_mult"]
    cdef const double[::1] stab_alpha = arrays["stab_alpha"]
    cdef const double[::1] stab_mass = arrays["stab_mass"]
    cdef const double[::1] stab_eps = arrays["stab_eps"]
    cdef const int64_t[::1] stab_rate = arrays["stab_rate"]
    cdef const int64_t[::1] stab_mult = arrays["stab_mult"]
    cdef const double[::1] kill_coef = arrays["kill_coef"]
    cdef const int64_t[::1] kill_rate = arrays["kill_rate"]

    T.n_rates = rate_kind.shape[0] - 1
    if T.n_rates > MAX_RATES:
        raise ValueError("too many rate functions in plan")
    T.rate_kind = &rate_kind[0]
    T.rate_arg = &rate_arg[0]
    T.mech_kind = &mech_kind[0]
    T.mech_a = &mech_a[0]
    T.mech_b = &mech_b[0]
    T.mech_c = &mech_c[0]
    T.mech_d = &mech_d[0]
    T.mech_alpha = &mech_alpha[0]
    T.mech_scale = &mech_scale[0]
    T.mech_c1 = &mech_c1[0]
    T.mech_c2 = &mech_c2[0]
    T.mech_g1 = &mech_g1[0]
    T.mech_ptr = &mech_ptr[0]
    T.atom_loc = &atom_loc[0]
    T.atom_mass = &atom_mass[0]
    T.n_drift = drift_coef.shape[0] - 1
    T.drift_coef = &drift_coef[0]
    T.drift_rate = &drift_rate[0]
    T.n_var = var_coef.shape[0] - 1
    T.var_coef = &var_coef[0]
    T.var_rate = &var_rate[0]
    T.n_jump = jump_size.shape[0] - 1
    T.jump_size = &jump_size[0]
    T.jump_mass = &jump_mass[0]
    T.jump_rate = &jump_rate[0]
    T.jump_mult = &jump_mult[0]
    T.n_stab = stab_alpha.shape[0] - 1
    T.stab_alpha = &stab_alpha[0]
    T.stab_mass = &stab_mass[0]
    T.stab_eps = &stab_eps[0]
    T.stab_rate = &stab_rate[0]
    T.stab_mult = &stab_mult[0]
    T.n_kill = kill_coef.shape[0] - 1
    T.kill_coef = &kill_coef[0]
    T.kill_rate = &kill_rate[0]
    T.zero_trap = 1 if plan.zero_trap else 0
    T.has_mult = 1 if (np.any(plan.jump_mult) or np.any(plan.stab_mult)) else 0
    T.is_static = 1 if plan.is_static else 0
    T.growth = exp(plan.lin_drift * h)
    T.floor = plan.floor
    T.cap = plan.cap

    with nogil:
        for i in range(n):
            j = 0
            while j < nsnap and snaps[j] == 0:
                out_x[j, i] = x[i]
                out_st[j, i] = st[i]
                j = j + 1
            for k in range(n_steps):
                if st[i] == 0 and not T.is_static:
                    step_path(&T, &x[i], &st[i], &clock[i], thr[i], keys[i], <uint64_t>(step0 + k), h)
                while j < nsnap and snaps[j] == k + 1:
                    out_x[j, i] = x[i]
                    out_st[j, i] = st[i]
                    j = j + 1


def _tables(plan):
    """Contiguous copies of the plan arrays, padded by one so empty tables have a valid pointer."""
    from ._special import _constants

    def pad(a, dtype):
        a = np.asarray(a, dtype=dtype)
        return np.ascontiguousarray(np.concatenate([a, np.zeros(1, dtype=dtype)]))

    c1, c2, g1 = [], [], []
    for al, sc in zip(plan.mech_alpha, plan.mech_scale):
        if sc > 0.0:
            k1, k2, k3 = _constants(float(al))
        else:
            k1 = k2 = k3 = 0.0
        c1.append(k1)
        c2.append(k2)
        g1.append(k3)
    stab_mass = [s * (e ** -a - 1.0) / a for a, s, e in zip(plan.stab_alpha, plan.stab_scale, plan.stab_eps)]
    f8, i8 = np.float64, np.int64
    out = {
        "mech_c1": pad(c1, f8),
        "mech_c2": pad(c2, f8),
        "mech_g1": pad(g1, f8),
        "stab_mass": pad(stab_mass, f8),
    }
    for name in ("rate_kind", "rate_arg", "mech_kind", "mech_ptr", "drift_rate", "var_rate",
                 "jump_rate", "jump_mult", "stab_rate", "stab_mult", "kill_rate"):
        out[name] = pad(getattr(plan, name), i8)
    for name in ("mech_a", "mech_b", "mech_c", "mech_d", "mech_alpha", "mech_scale", "atom_loc",
                 "atom_mass", "drift_coef", "var_coef", "jump_size", "jump_mass", "stab_alpha",
                 "stab_eps", "kill_coef"):
        out[name] = pad(getattr(plan, name), f8)
    return out
