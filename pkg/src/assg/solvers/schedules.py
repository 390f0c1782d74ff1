"""Stage counts, inner iteration counts and region sizes of the ASSG family."""

from __future__ import annotations

import math

from ..errors import ConfigurationError

MAX_FIXED_POINT_ROUNDS = 50


def compute_stage_count(eps0, eps):
    """K = max(1, ceil(log2(eps0 / eps)))."""
    if not (eps0 > 0 and eps > 0):
        raise ConfigurationError("eps0 and eps must be positive")
    if eps > eps0:
        raise ConfigurationError(f"eps={eps} exceeds eps0={eps0}")
    return max(1, math.ceil(math.log2(eps0 / eps)))


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"failure probability must lie in (0, 1), got {delta}")


def compute_t_assg_c(G, D1, eps0, delta_tilde):
    """Inner iterations per stage of the ball-constrained method."""
    _check_delta(delta_tilde)
    return math.ceil(max(9.0, 1728.0 * math.log(1.0 / delta_tilde)) * G**2 * D1**2 / eps0**2)


def compute_t_prox_assg(G, D1, eps0, rho, delta_tilde):
    """Inner iterations per stage of the proximal ball-constrained method."""
    _check_delta(delta_tilde)
    a = max(16.0, 3072.0 * math.log(1.0 / delta_tilde)) * G**2 * D1**2 / eps0**2
    return math.ceil(max(a, 8.0 * rho * D1 / eps0))


def _assg_r_bound(t, G, beta1, eps0, delta_tilde, rho):
    lt = math.log(t)
    return max(3.0, 136.0 * beta1 * (G + rho) ** 2
               * (1.0 + math.log(4.0 * lt / delta_tilde) + lt) / eps0)


def compute_t_assg_r(G, beta1, eps0, delta_tilde, rho=0.0):
    """Smallest integer t >= bound(t) for the regularized variants.

    The bound grows like log t, so iterating t <- ceil(bound(t)) from t = 3
    climbs monotonically to the least fixed point.
    """
    _check_delta(delta_tilde)
    t = 3
    for _ in range(MAX_FIXED_POINT_ROUNDS):
        nxt = max(t, math.ceil(_assg_r_bound(t, G, beta1, eps0, delta_tilde, rho)))
        if nxt == t:
            return t
        t = nxt
    raise ConfigurationError("inner iteration count did not stabilize")


def compute_t_global(G, c_hat, delta_tilde, eps_k):
    """Stage-k iterations of the global-error-bound variant."""
    _check_delta(delta_tilde)
    return math.ceil(6912.0 * G**2 * c_hat**2 * math.log(1.0 / delta_tilde)
                     * max(1.0, 1.0 / eps_k))


def global_region(c_hat, eps_prev):
    """D_k = c_hat (eps_{k-1} + sqrt(eps_{k-1}))."""
    return c_hat * (eps_prev + math.sqrt(eps_prev))


def derive_D1(c, eps0, eps, theta):
    return c * eps0 / eps ** (1.0 - theta)


def derive_beta1(c, eps0, eps, theta):
    return 2.0 * c**2 * eps0 / eps ** (2.0 * (1.0 - theta))


def rassg_growth(theta):
    """(t factor, D1 factor) applied between restarts."""
    return 2.0 ** (2.0 * (1.0 - theta)), 2.0 ** (1.0 - theta)


def rassg_restarts(eps0, eps):
    """S = ceil(log2(eps0 / (2 eps))) + 1, at least 1."""
    return max(1, math.ceil(math.log2(eps0 / (2.0 * eps))) + 1)


def desk_scale(t, factor):
    if factor == 1.0:
        return int(t)
    return max(1, math.ceil(factor * t))
