"""Compiled numerical core.

Every loss, regularizer, projection and proximal map used by the package is
implemented once here, as numba-compiled scalar/vector routines keyed by
integer codes.  The public modules (``geometry``, ``problems``, ``solvers``)
validate inputs and translate their objects to these codes.

The inner loops of all stochastic solvers live in :func:`run_block`; a solver
stage is a sequence of calls to it over pre-drawn sample indices.
"""

import math

import numpy as np
from numba import njit

# loss codes
HINGE = 0
ABSOLUTE = 1
EPS_INSENSITIVE = 2
HUBER = 3
SQUARED_HINGE = 4
SQUARE = 5

# regularizer codes
REG_NONE = 0
REG_L1 = 1
REG_LINF = 2
REG_HUBER = 3

# domain codes
DOM_ALL = 0
DOM_BOX = 1
DOM_BALL = 2

# update rules for run_block
UPD_PLAIN = 0  # w <- P_K(w - eta g)
UPD_BALL = 1  # w <- P_{K cap B(anchor, radius)}(w - eta g)
UPD_SSGS = 2  # w <- P_K((1 - 2/t) w + (2/t) anchor - (2 beta / t) g)
UPD_PROX_BALL = 3  # w <- prox_{eta R} over B(anchor, radius) of (w - eta g)
UPD_PROX_SSGS = 4  # w <- prox_{(2 beta / t) R} of the SSGS drift

# layout of the stats vector filled by run_block
ST_MAX_G = 0
ST_G_VIOLATIONS = 1
ST_MAX_DIST = 2
ST_CONFINE_VIOLATIONS = 3
ST_MAX_DYKSTRA = 4
ST_SIZE = 5

STATUS_OK = 0
STATUS_DYKSTRA_FAILED = 1


# ---------------------------------------------------------------------------
# losses: scalar l(z, y) and a deterministic subgradient in z


@njit(cache=True)
def huber_scalar(r, delta):
    a = abs(r)
    if a <= delta:
        return 0.5 * r * r
    return delta * (a - 0.5 * delta)


@njit(cache=True)
def loss_value(code, param, z, y):
    if code == HINGE:
        m = 1.0 - y * z
        return m if m > 0.0 else 0.0
    elif code == ABSOLUTE:
        return abs(z - y)
    elif code == EPS_INSENSITIVE:
        m = abs(z - y) - param
        return m if m > 0.0 else 0.0
    elif code == HUBER:
        return huber_scalar(z - y, param)
    elif code == SQUARED_HINGE:
        m = 1.0 - y * z
        return m * m if m > 0.0 else 0.0
    else:
        r = z - y
        return r * r


@njit(cache=True)
def loss_slope(code, param, z, y):
    # at kinks the flat (zero) branch is chosen
    if code == HINGE:
        return -y if y * z < 1.0 else 0.0
    elif code == ABSOLUTE:
        r = z - y
        if r > 0.0:
            return 1.0
        elif r < 0.0:
            return -1.0
        return 0.0
    elif code == EPS_INSENSITIVE:
        r = z - y
        if r > param:
            return 1.0
        elif r < -param:
            return -1.0
        return 0.0
    elif code == HUBER:
        r = z - y
        if r > param:
            return param
        elif r < -param:
            return -param
        return r
    elif code == SQUARED_HINGE:
        m = 1.0 - y * z
        return -2.0 * y * m if m > 0.0 else 0.0
    else:
        return 2.0 * (z - y)


@njit(cache=True)
def loss_value_array(code, param, z, y, out):
    for i in range(z.shape[0]):
        out[i] = loss_value(code, param, z[i], y[i])


@njit(cache=True)
def loss_slope_array(code, param, z, y, out):
    for i in range(z.shape[0]):
        out[i] = loss_slope(code, param, z[i], y[i])


# ---------------------------------------------------------------------------
# regularizers


@njit(cache=True)
def reg_value(code, lam, param, w):
    if code == REG_NONE or lam == 0.0:
        return 0.0
    s = 0.0
    if code == REG_L1:
        for i in range(w.shape[0]):
            s += abs(w[i])
    elif code == REG_LINF:
        for i in range(w.shape[0]):
            a = abs(w[i])
            if a > s:
                s = a
    else:
        for i in range(w.shape[0]):
            s += huber_scalar(w[i], param)
    return lam * s


@njit(cache=True)
def reg_subgrad_add(code, lam, param, w, g):
    """Add a subgradient of R at w into g (in place)."""
    if code == REG_NONE or lam == 0.0:
        return
    if code == REG_L1:
        for i in range(w.shape[0]):
            if w[i] > 0.0:
                g[i] += lam
            elif w[i] < 0.0:
                g[i] -= lam
    elif code == REG_LINF:
        best = -1
        top = 0.0
        for i in range(w.shape[0]):
            a = abs(w[i])
            if a > top:
                top = a
                best = i
        if best >= 0:
            g[best] += lam if w[best] > 0.0 else -lam
    else:
        for i in range(w.shape[0]):
            v = w[i]
            if v > param:
                v = param
            elif v < -param:
                v = -param
            g[i] += lam * v


@njit(cache=True)
def soft_threshold(v, tau, out):
    for i in range(v.shape[0]):
        a = abs(v[i]) - tau
        if a > 0.0:
            out[i] = a if v[i] > 0.0 else -a
        else:
            out[i] = 0.0


@njit(cache=True)
def project_l1_ball(v, radius, out):
    """Euclidean projection onto {u : ||u||_1 <= radius} (sort based)."""
    d = v.shape[0]
    total = 0.0
    for i in range(d):
        total += abs(v[i])
    if total <= radius:
        for i in range(d):
            out[i] = v[i]
        return
    if radius <= 0.0:
        for i in range(d):
            out[i] = 0.0
        return
    a = np.sort(np.abs(v))[::-1]
    cum = 0.0
    theta = 0.0
    for j in range(d):
        cum += a[j]
        cand = (cum - radius) / (j + 1)
        if a[j] - cand > 0.0:
            theta = cand
    for i in range(d):
        m = abs(v[i]) - theta
        if m > 0.0:
            out[i] = m if v[i] > 0.0 else -m
        else:
            out[i] = 0.0


@njit(cache=True)
def prox_reg(code, lam, param, eta, v, out):
    """out = argmin_u 0.5 ||u - v||^2 + eta R(u) over all of R^d."""
    a = eta * lam
    if code == REG_NONE or a == 0.0:
        for i in range(v.shape[0]):
            out[i] = v[i]
    elif code == REG_L1:
        soft_threshold(v, a, out)
    elif code == REG_LINF:
        # Moreau: prox of a*||.||_inf is v minus projection onto the a-l1-ball
        project_l1_ball(v, a, out)
        for i in range(v.shape[0]):
            out[i] = v[i] - out[i]
    else:
        knee = param * (1.0 + a)
        for i in range(v.shape[0]):
            x = v[i]
            if abs(x) <= knee:
                out[i] = x / (1.0 + a)
            else:
                out[i] = x - a * param if x > 0.0 else x + a * param


# ---------------------------------------------------------------------------
# projections


@njit(cache=True)
def dist(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        r = a[i] - b[i]
        s += r * r
    return math.sqrt(s)


@njit(cache=True)
def project_ball(center, radius, v, out):
    nrm = dist(v, center)
    # a few ulps of slack so points already on the sphere stay fixed
    if nrm <= radius * (1.0 + 4e-16 * v.shape[0]):
        for i in range(v.shape[0]):
            out[i] = v[i]
    elif radius <= 0.0:
        for i in range(v.shape[0]):
            out[i] = center[i]
    else:
        scale = radius / nrm
        for i in range(v.shape[0]):
            out[i] = center[i] + (v[i] - center[i]) * scale


@njit(cache=True)
def project_domain(dom, lo, hi, dcenter, dradius, v, out):
    if dom == DOM_ALL:
        for i in range(v.shape[0]):
            out[i] = v[i]
    elif dom == DOM_BOX:
        for i in range(v.shape[0]):
            x = v[i]
            if x < lo[i]:
                x = lo[i]
            elif x > hi[i]:
                x = hi[i]
            out[i] = x
    else:
        project_ball(dcenter, dradius, v, out)


@njit(cache=True)
def in_domain(dom, lo, hi, dcenter, dradius, v):
    if dom == DOM_ALL:
        return True
    if dom == DOM_BOX:
        for i in range(v.shape[0]):
            if v[i] < lo[i] or v[i] > hi[i]:
                return False
        return True
    return dist(v, dcenter) <= dradius


@njit(cache=True)
def project_intersection(dom, lo, hi, dcenter, dradius, center, radius, v, out,
                         tol, max_iter):
    """Project v onto K cap B(center, radius).

    Returns the number of Dykstra iterations used, 0 for the closed-form
    cases and -1 when Dykstra did not converge (``out`` then holds the last
    iterate).
    """
    d = v.shape[0]
    if radius <= 0.0:
        for i in range(d):
            out[i] = center[i]
        return 0
    if dom == DOM_ALL:
        project_ball(center, radius, v, out)
        return 0
    if dom == DOM_BALL:
        concentric = True
        for i in range(d):
            if dcenter[i] != center[i]:
                concentric = False
                break
        if concentric:
            project_ball(center, min(radius, dradius), v, out)
            return 0
    if dist(v, center) <= radius and in_domain(dom, lo, hi, dcenter, dradius, v):
        for i in range(d):
            out[i] = v[i]
        return 0
    # Dykstra's alternating projections between K and the ball
    x = v.copy()
    p = np.zeros(d)
    q = np.zeros(d)
    y = np.empty(d)
    buf = np.empty(d)
    xn = np.empty(d)
    used = -1
    for it in range(max_iter):
        for i in range(d):
            buf[i] = x[i] + p[i]
        project_domain(dom, lo, hi, dcenter, dradius, buf, y)
        # x can sit still for a round while the corrections move, so the
        # stopping test also watches p and q
        change = 0.0
        for i in range(d):
            pn = buf[i] - y[i]
            change += (pn - p[i]) ** 2
            p[i] = pn
            buf[i] = y[i] + q[i]
        project_ball(center, radius, buf, xn)
        for i in range(d):
            qn = buf[i] - xn[i]
            change += (qn - q[i]) ** 2
            q[i] = qn
        change = np.sqrt(change) + dist(xn, x)
        for i in range(d):
            x[i] = xn[i]
        if change < tol:
            used = it + 1
            break
    if used < 0:
        for i in range(d):
            out[i] = x[i]
        return -1
    # final iterate made exactly feasible: project onto K, then pull towards
    # the (feasible) center, which stays inside K by convexity
    project_domain(dom, lo, hi, dcenter, dradius, x, out)
    nrm = dist(out, center)
    if nrm > radius:
        scale = radius / nrm
        for i in range(d):
            out[i] = center[i] + (out[i] - center[i]) * scale
    return used


@njit(cache=True)
def _shifted_prox(code, lam, param, eta, center, v, mu, tmp, out):
    s = 1.0 / (1.0 + mu)
    for i in range(v.shape[0]):
        tmp[i] = (v[i] + mu * center[i]) * s
    prox_reg(code, lam, param, eta * s, tmp, out)
    return dist(out, center)


@njit(cache=True)
def prox_reg_ball(code, lam, param, eta, center, radius, v, out, tol):
    """argmin over ||u - center|| <= radius of 0.5 ||u - v||^2 + eta R(u).

    Bisection on the multiplier mu of the ball constraint; u(mu) is the
    unconstrained prox at (v + mu c)/(1 + mu) with parameter eta/(1 + mu).
    Returns the number of bisection steps.
    """
    d = v.shape[0]
    if radius <= 0.0:
        for i in range(d):
            out[i] = center[i]
        return 0
    if code == REG_NONE or eta * lam == 0.0:
        project_ball(center, radius, v, out)
        return 0
    prox_reg(code, lam, param, eta, v, out)
    if dist(out, center) <= radius:
        return 0
    tmp = np.empty(d)
    cand = np.empty(d)
    lo = 0.0
    hi = 1.0
    for _ in range(2000):
        r = _shifted_prox(code, lam, param, eta, center, v, hi, tmp, cand)
        if r <= radius:
            break
        lo = hi
        hi *= 2.0
    for i in range(d):
        out[i] = cand[i]
    r_hi = dist(out, center)
    steps = 0
    while radius - r_hi >= tol and hi - lo > 1e-15 * hi:
        mid = 0.5 * (lo + hi)
        r = _shifted_prox(code, lam, param, eta, center, v, mid, tmp, cand)
        steps += 1
        if r > radius:
            lo = mid
        else:
            hi = mid
            r_hi = r
            for i in range(d):
                out[i] = cand[i]
    if r_hi > radius:
        scale = radius / r_hi
        for i in range(d):
            out[i] = center[i] + (out[i] - center[i]) * scale
    return steps


# ---------------------------------------------------------------------------
# objective evaluations over a finite sample


@njit(cache=True)
def sample_subgrad(X, y, j, loss_code, loss_p, w, g):
    z = 0.0
    for i in range(w.shape[0]):
        z += X[j, i] * w[i]
    s = loss_slope(loss_code, loss_p, z, y[j])
    for i in range(w.shape[0]):
        g[i] = s * X[j, i]


@njit(cache=True)
def batch_values(X, y, loss_code, loss_p, reg_code, lam, reg_p, W, out):
    """Empirical objective (mean loss plus regularizer) at each row of W."""
    n = X.shape[0]
    for m in range(W.shape[0]):
        s = 0.0
        for j in range(n):
            z = 0.0
            for i in range(X.shape[1]):
                z += X[j, i] * W[m, i]
            s += loss_value(loss_code, loss_p, z, y[j])
        out[m] = s / n + reg_value(reg_code, lam, reg_p, W[m])


@njit(cache=True)
def batch_subgrads(X, y, loss_code, loss_p, reg_code, lam, reg_p, W, out):
    """Full (deterministic) subgradient of the empirical objective at each row of W."""
    n = X.shape[0]
    d = X.shape[1]
    for m in range(W.shape[0]):
        for i in range(d):
            out[m, i] = 0.0
        for j in range(n):
            z = 0.0
            for i in range(d):
                z += X[j, i] * W[m, i]
            s = loss_slope(loss_code, loss_p, z, y[j])
            for i in range(d):
                out[m, i] += s * X[j, i]
        for i in range(d):
            out[m, i] /= n
        reg_subgrad_add(reg_code, lam, reg_p, W[m], out[m])


# ---------------------------------------------------------------------------
# the stochastic inner loop


@njit(cache=True)
def run_block(X, y, idx, loss_code, loss_p, reg_code, lam, reg_p, fold_reg,
              dom, lo, hi, dcenter, dradius,
              update, anchor, radius, eta, beta, rho, t0,
              w, wsum, stats, G, tol_proj, max_dykstra, tol_prox, path):
    """Run len(idx) stochastic iterations, updating w, wsum, stats in place.

    Iteration numbers are t0 + 1, ..., t0 + len(idx).  The running sum wsum
    accumulates the iterate *before* each update, so after t iterations
    wsum / t is the average of w_1, ..., w_t.  When ``path`` has rows, the
    post-update iterate of step j is written to path[j].
    """
    d = w.shape[0]
    g = np.empty(d)
    v = np.empty(d)
    nxt = np.empty(d)
    record = path.shape[0] > 0
    gtol = G * (1.0 + 1e-12)
    for j in range(idx.shape[0]):
        t = t0 + j + 1
        for i in range(d):
            wsum[i] += w[i]
        sample_subgrad(X, y, idx[j], loss_code, loss_p, w, g)
        if fold_reg:
            reg_subgrad_add(reg_code, lam, reg_p, w, g)
        gn = 0.0
        for i in range(d):
            gn += g[i] * g[i]
        gn = math.sqrt(gn)
        if gn > stats[ST_MAX_G]:
            stats[ST_MAX_G] = gn
        if gn > gtol:
            stats[ST_G_VIOLATIONS] += 1.0

        if update == UPD_PLAIN or update == UPD_BALL or update == UPD_PROX_BALL:
            for i in range(d):
                v[i] = w[i] - eta * g[i]
        else:
            a = 1.0 - 2.0 / t
            b = 2.0 / t
            c = 2.0 * beta / t
            for i in range(d):
                v[i] = a * w[i] + b * anchor[i] - c * g[i]

        if update == UPD_PLAIN or update == UPD_SSGS:
            project_domain(dom, lo, hi, dcenter, dradius, v, nxt)
        elif update == UPD_BALL:
            used = project_intersection(dom, lo, hi, dcenter, dradius, anchor,
                                        radius, v, nxt, tol_proj, max_dykstra)
            if used < 0:
                for i in range(d):
                    w[i] = nxt[i]
                return STATUS_DYKSTRA_FAILED
            if used > stats[ST_MAX_DYKSTRA]:
                stats[ST_MAX_DYKSTRA] = used
        elif update == UPD_PROX_BALL:
            prox_reg_ball(reg_code, lam, reg_p, eta, anchor, radius, v, nxt, tol_prox)
        else:
            prox_reg(reg_code, lam, reg_p, 2.0 * beta / t, v, nxt)

        for i in range(d):
            w[i] = nxt[i]
        dw = dist(w, anchor)
        if dw > stats[ST_MAX_DIST]:
            stats[ST_MAX_DIST] = dw
        if update == UPD_SSGS or update == UPD_PROX_SSGS:
            bound = 2.0 * beta * (stats[ST_MAX_G] + rho)
            if dw > bound * (1.0 + 1e-12) + 1e-12:
                stats[ST_CONFINE_VIOLATIONS] += 1.0
        if record:
            for i in range(d):
                path[j, i] = w[i]
    return STATUS_OK
