"""Barrier interior-point solver for the trajectory subproblem.

The program class is fixed: maximize a concave objective

    sum_n [ -g_u[n]*u[n] - log2(1 + P[n]/t[n]) ]   (+ constant)

over per-slot variables (x, y, u, t, xi_1..xi_Kr) subject to

  * mobility balls    (x[n+1]-x[n])^2 + (y[n+1]-y[n])^2 <= L^2   (pinned ends),
  * ball epigraphs    x[n]^2 + y[n]^2 + H^2 <= u[n],
  * rotated cones     b^2 + c^2 <= a*d  per (eavesdropper, slot) with
                      a = xi+1, b/c/d affine in (x, y, t, xi),
  * affine rows       d >= 0 for radius-zero eavesdroppers,
  * bounds            t >= H^2, xi >= 0.

Everything is handled with logarithmic barriers and damped Newton steps; the
KKT matrices are block tridiagonal (slots couple only through the mobility
chain), so each step costs one banded Cholesky solve.  A single-slack pull-in
phase produces a strictly interior starting point when the warm start sits on
the boundary (for example a trajectory that flies at maximum speed, which
makes every mobility constraint tight).  The pull-in slack enters the cone
rows as a*(d+s) - b^2 - c^2 >= 0, which is still an affine section of the
rotated cone and therefore convex.

Variables are packed slot-major, block ``[x, y, u, t, xi_*]``; u entries of
slots with zero transmit power have no effect on the objective or on any
binding constraint and are frozen at their start value to keep the KKT matrix
nonsingular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky_banded, cho_solve_banded

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverSettings:
    feas_tol: float = 1e-8
    opt_tol: float = 1e-8              # relative duality-gap target
    max_newton_iters: int = 3000       # Newton budget per phase
    max_centering_iters: int = 1000    # Newton cap per barrier stage
    barrier_mu: float = 30.0           # barrier parameter growth factor
    tau0_gap: float = 64.0             # initial gap (objective units) fixing tau0
    newton_tol: float = 1e-9           # centering stop on lambda^2 / 2
    interior_margin_rel: float = 1e-3  # pull-in depth, relative to step^2 scale

    def __post_init__(self):
        if min(self.feas_tol, self.opt_tol, self.newton_tol) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverResult:
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    t: np.ndarray
    xi: np.ndarray          # (Kr, N)
    objective: float        # maximized surrogate value, constants included
    status: str             # "optimal" | "max_iter" | "numerical_trouble"
    newton_iters: int
    duality_gap: float      # absolute bound, objective units
    kkt_residual: float     # scaled stationarity residual at the returned point
    min_margin: float       # direct post-hoc constraint evaluation (scaled)
    tau: float              # final barrier weight (1/tau = barrier multiplier scale)


OPTIMAL = "optimal"
MAX_ITER = "max_iter"
TROUBLE = "numerical_trouble"

_RIDGES = (0.0, 1e-13, 1e-10, 1e-7)


class _Workspace:
    """Precomputed layout and vectorized evaluators for one program."""

    def __init__(self, prog):
        self.prog = prog
        self.N = N = prog.n_slots
        self.Kr = Kr = prog.cone_q2.shape[0]
        self.Ka = Ka = prog.aff_kx.shape[0]
        self.B = B = 4 + Kr
        self.nz = N * B
        self.ub = B + 1
        self.h2 = prog.h2
        self.L2 = prog.step_sq_max
        self.u_active = prog.g_u > 0.0
        self.n_u_active = int(self.u_active.sum())
        self.m_bar = (N + 1) + self.n_u_active + (2 * Kr + Ka + 1) * N
        self.scale_ref = max(self.L2, 1e-9 * self.h2)

        iu, ju = np.triu_indices(B)
        self._iu, self._ju = iu, ju
        n_idx = np.arange(N)[:, None]
        rowD = n_idx * B + iu[None, :]
        colD = n_idx * B + ju[None, :]
        self._idxD = ((self.ub + rowD - colD) * self.nz + colD).ravel()
        if N > 1:
            m_idx = np.arange(N - 1)[:, None]
            ie = np.array([0, 0, 1, 1])
            je = np.array([0, 1, 0, 1])
            rowE = m_idx * B + ie[None, :]
            colE = (m_idx + 1) * B + je[None, :]
            self._ie, self._je = ie, je
            self._idxE = ((self.ub + rowE - colE) * self.nz + colE).ravel()
        else:
            self._idxE = np.empty(0, dtype=int)

        self._ox = np.arange(N) * B
        self._oy = self._ox + 1
        self._ou = self._ox + 2
        self._ot = self._ox + 3

    # -- packing ---------------------------------------------------------
    def pack(self, x, y, u, t, xi) -> np.ndarray:
        z = np.empty(self.nz)
        z[self._ox] = x
        z[self._oy] = y
        z[self._ou] = u
        z[self._ot] = t
        for k in range(self.Kr):
            z[self._ox + 4 + k] = xi[k]
        return z

    def unpack(self, z):
        x = z[self._ox].copy()
        y = z[self._oy].copy()
        u = z[self._ou].copy()
        t = z[self._ot].copy()
        xi = np.empty((self.Kr, self.N))
        for k in range(self.Kr):
            xi[k] = z[self._ox + 4 + k]
        return x, y, u, t, xi

    # -- margins ---------------------------------------------------------
    def margins(self, z, s: float = 0.0):
        """All constraint margins; strictly positive means interior.

        With a nonzero slack the cone margin is a*(d+s)-b^2-c^2 and every
        other relaxable margin is shifted by +s.
        """
        p = self.prog
        x, y, u, t, xi = self.unpack(z)
        xpad = np.concatenate(([p.pin_start[0]], x, [p.pin_end[0]]))
        ypad = np.concatenate(([p.pin_start[1]], y, [p.pin_end[1]]))
        mob = self.L2 - np.diff(xpad) ** 2 - np.diff(ypad) ** 2 + s
        u_m = u - x**2 - y**2 - self.h2 + s
        cone = np.empty((self.Kr, self.N))
        for k in range(self.Kr):
            a = xi[k] + 1.0
            b = p.cone_eve_x[k] - x
            c = p.cone_eve_y[k] - y
            d = p.cone_kx[k] * x + p.cone_ky[k] * y - t - p.cone_q2[k] * xi[k] + p.cone_k0[k]
            cone[k] = a * (d + s) - b**2 - c**2
        aff = np.empty((self.Ka, self.N))
        for k in range(self.Ka):
            aff[k] = p.aff_kx[k] * x + p.aff_ky[k] * y - t + p.aff_k0[k] + s
        tb = t - self.h2 + s
        xib = xi
        return mob, u_m, cone, aff, tb, xib

    def domain_ok(self, z, s: float = 0.0, pull_in: bool = False) -> bool:
        mob, u_m, cone, aff, tb, xib = self.margins(z, s)
        if not pull_in and self.n_u_active and u_m[self.u_active].min() <= 0.0:
            return False
        return (mob.min() > 0.0
                and (cone.min() > 0.0 if self.Kr else True)
                and (aff.min() > 0.0 if self.Ka else True)
                and tb.min() > 0.0
                and (xib.min() > 0.0 if self.Kr else True))

    def interior_deficit(self, z, include_u: bool = True) -> float:
        """Largest slack (step^2 units) still needed for strict interiority."""
        mob, u_m, cone, aff, tb, xib = self.margins(z, 0.0)
        if self.Kr and xib.min() <= 0.0:
            raise ValueError("xi start must be strictly positive")
        worst = max(-mob.min(), -tb.min())
        if include_u and self.n_u_active:
            worst = max(worst, -u_m[self.u_active].min())
        if self.Kr:
            xi = np.stack([z[self._ox + 4 + k] for k in range(self.Kr)])
            worst = max(worst, float((-cone / (xi + 1.0)).max()))
        if self.Ka:
            worst = max(worst, -aff.min())
        return float(worst)

    def barrier(self, z, s: float = 0.0, pull_in: bool = False) -> float:
        mob, u_m, cone, aff, tb, xib = self.margins(z, s)
        parts = [np.log(mob).sum(), np.log(tb).sum()]
        if self.n_u_active and not pull_in:
            parts.append(np.log(u_m[self.u_active]).sum())
        if self.Kr:
            parts.append(np.log(cone).sum())
            parts.append(np.log(xib).sum())
        if self.Ka:
            parts.append(np.log(aff).sum())
        return -float(sum(parts))

    def f0(self, z) -> float:
        p = self.prog
        u = z[self._ou]
        t = z[self._ot]
        return float((p.g_u * u).sum() + (np.log1p(p.p_scaled / t) / LN2).sum())

    # -- Newton system ----------------------------------------------------
    def assemble(self, z, s, tau, pull_in: bool):
        """Gradient and Hessian of tau*f0 + barrier at (z, s).

        Returns (gz, D, E, gs, v, h): per-slot upper blocks D, 2x2 mobility
        cross blocks E, and, in pull-in mode, the dense slack border (v, h)
        plus its gradient entry gs.
        """
        p = self.prog
        N, B, Kr, Ka = self.N, self.B, self.Kr, self.Ka
        x, y, u, t, xi = self.unpack(z)
        gz = np.zeros(self.nz)
        D = np.zeros((N, B, B))
        E = np.zeros((max(N - 1, 0), 2, 2))
        v = np.zeros(self.nz) if pull_in else None
        h = 0.0
        gs = tau if pull_in else 0.0  # pull-in objective is the slack itself

        if not pull_in:
            gz[self._ou] += tau * p.g_u
            pt = p.p_scaled
            gz[self._ot] += tau * (1.0 / (t + pt) - 1.0 / t) / LN2
            D[:, 3, 3] += tau * (1.0 / t**2 - 1.0 / (t + pt) ** 2) / LN2
            D[:, 2, 2] += np.where(self.u_active, 0.0, 1.0)  # freeze unused u
        else:
            # feasibility never hinges on u (it can always be lifted above the
            # quadratic), so the pull-in phase freezes it and drops its rows
            D[:, 2, 2] += 1.0

        # ball epigraphs: m = u - x^2 - y^2 - H^2 (absent from the pull-in phase)
        if self.n_u_active and not pull_in:
            act = self.u_active
            m = (u - x**2 - y**2 - self.h2)
            w1 = np.where(act, 1.0 / np.where(act, m, 1.0), 0.0)
            w2 = w1 * w1
            gmx, gmy = -2.0 * x, -2.0 * y
            gz[self._ox] += -gmx * w1
            gz[self._oy] += -gmy * w1
            gz[self._ou] += -1.0 * w1
            D[:, 0, 0] += gmx * gmx * w2 + 2.0 * w1
            D[:, 1, 1] += gmy * gmy * w2 + 2.0 * w1
            D[:, 2, 2] += w2 * act
            D[:, 0, 1] += gmx * gmy * w2
            D[:, 0, 2] += gmx * w2
            D[:, 1, 2] += gmy * w2

        # rotated cones: q = a*(d+s) - b^2 - c^2
        for k in range(Kr):
            a = xi[k] + 1.0
            b = p.cone_eve_x[k] - x
            c = p.cone_eve_y[k] - y
            d = p.cone_kx[k] * x + p.cone_ky[k] * y - t - p.cone_q2[k] * xi[k] + p.cone_k0[k]
            q = a * (d + s) - b**2 - c**2
            iw = 1.0 / q
            iw2 = iw * iw
            gqx = a * p.cone_kx[k] + 2.0 * b
            gqy = a * p.cone_ky[k] + 2.0 * c
            gqt = -a
            gqxi = (d + s) - p.cone_q2[k] * a
            oxi = 4 + k
            gz[self._ox] += -gqx * iw
            gz[self._oy] += -gqy * iw
            gz[self._ot] += -gqt * iw
            gz[self._ox + oxi] += -gqxi * iw
            # rank-one part g g^T / q^2
            D[:, 0, 0] += gqx * gqx * iw2
            D[:, 0, 1] += gqx * gqy * iw2
            D[:, 0, 3] += gqx * gqt * iw2
            D[:, 0, oxi] += gqx * gqxi * iw2
            D[:, 1, 1] += gqy * gqy * iw2
            D[:, 1, 3] += gqy * gqt * iw2
            D[:, 1, oxi] += gqy * gqxi * iw2
            D[:, 3, 3] += gqt * gqt * iw2
            D[:, 3, oxi] += gqt * gqxi * iw2
            D[:, oxi, oxi] += gqxi * gqxi * iw2
            # minus Hessian of q over q
            D[:, 0, 0] += 2.0 * iw
            D[:, 1, 1] += 2.0 * iw
            D[:, 0, oxi] += -p.cone_kx[k] * iw
            D[:, 1, oxi] += -p.cone_ky[k] * iw
            D[:, 3, oxi] += 1.0 * iw
            D[:, oxi, oxi] += 2.0 * p.cone_q2[k] * iw
            if pull_in:
                gqs = a
                gs += float((-gqs * iw).sum())
                v[self._ox] += gqx * gqs * iw2
                v[self._oy] += gqy * gqs * iw2
                v[self._ot] += gqt * gqs * iw2
                v[self._ox + oxi] += gqxi * gqs * iw2 - 1.0 * iw
                h += float((gqs * gqs * iw2).sum())
            # xi >= 0 barrier
            gz[self._ox + oxi] += -1.0 / xi[k]
            D[:, oxi, oxi] += 1.0 / xi[k] ** 2

        # affine rows (radius-zero eavesdroppers): m = d (+ s)
        for k in range(Ka):
            m = p.aff_kx[k] * x + p.aff_ky[k] * y - t + p.aff_k0[k] + s
            w1 = 1.0 / m
            w2 = w1 * w1
            gz[self._ox] += -p.aff_kx[k] * w1
            gz[self._oy] += -p.aff_ky[k] * w1
            gz[self._ot] += w1
            D[:, 0, 0] += p.aff_kx[k] ** 2 * w2
            D[:, 0, 1] += p.aff_kx[k] * p.aff_ky[k] * w2
            D[:, 0, 3] += -p.aff_kx[k] * w2
            D[:, 1, 1] += p.aff_ky[k] ** 2 * w2
            D[:, 1, 3] += -p.aff_ky[k] * w2
            D[:, 3, 3] += w2
            if pull_in:
                gs += float((-w1).sum())
                v[self._ox] += p.aff_kx[k] * w2
                v[self._oy] += p.aff_ky[k] * w2
                v[self._ot] += -w2
                h += float(w2.sum())

        # t >= H^2 (+ s)
        m = t - self.h2 + s
        w1 = 1.0 / m
        w2 = w1 * w1
        gz[self._ot] += -w1
        D[:, 3, 3] += w2
        if pull_in:
            gs += float((-w1).sum())
            v[self._ot] += w2
            h += float(w2.sum())

        # mobility chain (+ s)
        xpad = np.concatenate(([p.pin_start[0]], x, [p.pin_end[0]]))
        ypad = np.concatenate(([p.pin_start[1]], y, [p.pin_end[1]]))
        dx = np.diff(xpad)
        dy = np.diff(ypad)
        m = self.L2 - dx**2 - dy**2 + s
        w1 = 1.0 / m
        w2 = w1 * w1
        # head contributions (steps 0..N-1 end at slot j)
        j = np.arange(N)
        hx, hy = -2.0 * dx[:-1], -2.0 * dy[:-1]
        gz[self._ox] += -hx * w1[:-1]
        gz[self._oy] += -hy * w1[:-1]
        D[j, 0, 0] += hx * hx * w2[:-1] + 2.0 * w1[:-1]
        D[j, 1, 1] += hy * hy * w2[:-1] + 2.0 * w1[:-1]
        D[j, 0, 1] += hx * hy * w2[:-1]
        # tail contributions (steps 1..N start at slot j-1)
        tx, ty = 2.0 * dx[1:], 2.0 * dy[1:]
        gz[self._ox] += -tx * w1[1:]
        gz[self._oy] += -ty * w1[1:]
        D[j, 0, 0] += tx * tx * w2[1:] + 2.0 * w1[1:]
        D[j, 1, 1] += ty * ty * w2[1:] + 2.0 * w1[1:]
        D[j, 0, 1] += tx * ty * w2[1:]
        if N > 1:
            # inner steps j=1..N-1 couple slots j-1 (tail) and j (head)
            wi = w1[1:-1]
            wi2 = w2[1:-1]
            txi, tyi = tx[:-1], ty[:-1]
            hxi, hyi = hx[1:], hy[1:]
            E[:, 0, 0] += txi * hxi * wi2 - 2.0 * wi
            E[:, 0, 1] += txi * hyi * wi2
            E[:, 1, 0] += tyi * hxi * wi2
            E[:, 1, 1] += tyi * hyi * wi2 - 2.0 * wi
        if pull_in:
            gs += float((-w1).sum())
            h += float(w2.sum())
            v[self._ox] += hx * w2[:-1] + tx * w2[1:]
            v[self._oy] += hy * w2[:-1] + ty * w2[1:]
        return gz, D, E, gs, v, h

    def solve_kkt(self, D, E, gz, gs, v, h, pull_in: bool, ridge: float):
        ab = np.zeros((self.ub + 1, self.nz))
        flat = ab.reshape(-1)
        flat[self._idxD] = D[:, self._iu, self._ju].ravel()
        if self.N > 1:
            flat[self._idxE] = E[:, self._ie, self._je].ravel()
        if ridge > 0.0:
            ab[self.ub, :] += ridge * max(1.0, ab[self.ub, :].max())
        cfac = cholesky_banded(ab, lower=False)
        if not pull_in:
            dz = cho_solve_banded((cfac, False), -gz)
            return dz, 0.0
        pvec = cho_solve_banded((cfac, False), -gz)
        wvec = cho_solve_banded((cfac, False), v)
        denom = h - float(v @ wvec)
        if denom <= 0.0:
            raise np.linalg.LinAlgError("indefinite slack border")
        ds = (-gs - float(v @ pvec)) / denom
        dz = pvec - ds * wvec
        return dz, ds


# A stage may end slightly off-center when float resolution of the merit
# (which scales with tau*|f0|) swallows the remaining decrements.  Exits with
# lambda^2/2 below this are still accepted; the reported duality gap carries
# the sqrt(m)*lambda correction, which stays well under one percent.
_LOOSE_CENTER_TOL = 2.5e-2


def _center(ws: _Workspace, z, s, tau, pull_in, settings, budget, early_stop=None):
    """Damped Newton to the central point at barrier weight tau.

    Returns (z, s, iters, status, lam2) with status in {"centered", "early",
    "budget", "trouble"}.  The merit tau*f0 + barrier is asserted
    non-increasing across accepted steps, up to its floating-point resolution.
    """
    # measure the objective relative to the entry point: tau*f0 alone can reach
    # 1e13, whose float resolution would swallow the remaining decrements
    f0_ref = 0.0 if pull_in else ws.f0(z)

    def merit(z_, s_):
        base = s_ if pull_in else ws.f0(z_) - f0_ref
        return tau * base + ws.barrier(z_, s_, pull_in)

    cur = merit(z, s)
    iters = 0
    no_progress = 0
    lam2 = math.inf
    while iters < min(budget, settings.max_centering_iters):
        resolution = 8.0 * np.finfo(float).eps * max(1.0, abs(cur))
        gz, D, E, gs, v, h = ws.assemble(z, s, tau, pull_in)
        dz = ds = None
        for ridge in _RIDGES:
            try:
                dz, ds = ws.solve_kkt(D, E, gz, gs, v, h, pull_in, ridge)
                break
            except np.linalg.LinAlgError:
                continue
        if dz is None:
            return z, s, iters, "trouble", lam2
        lam2 = -(float(gz @ dz) + gs * ds)
        if lam2 < -1e-6 * max(1.0, abs(cur)):
            return z, s, iters, "trouble", lam2
        if lam2 / 2.0 <= settings.newton_tol:
            return z, s, iters, "centered", lam2
        if 0.25 * lam2 <= resolution:
            # remaining progress is below what the merit can resolve
            status = "centered" if lam2 / 2.0 <= _LOOSE_CENTER_TOL else "trouble"
            return z, s, iters, status, lam2
        step = 1.0
        for _ in range(96):
            if ws.domain_ok(z + step * dz, s + step * ds, pull_in):
                break
            step *= 0.5
        else:
            return z, s, iters, "trouble", lam2
        accepted = False
        for _ in range(60):
            cand = merit(z + step * dz, s + step * ds)
            if cand <= cur - 0.25 * step * lam2 + resolution:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            status = "centered" if lam2 / 2.0 <= _LOOSE_CENTER_TOL else "trouble"
            return z, s, iters, status, lam2
        z = z + step * dz
        s = s + step * ds
        new = merit(z, s)
        if new > cur + resolution:
            return z, s, iters, "trouble", lam2
        if cur - new <= resolution:
            no_progress += 1
            if no_progress >= 3:
                status = "centered" if lam2 / 2.0 <= _LOOSE_CENTER_TOL else "trouble"
                return z, s, iters, status, lam2
        else:
            no_progress = 0
        cur = new
        iters += 1
        if early_stop is not None and early_stop(z, s):
            return z, s, iters, "early", lam2
    return z, s, iters, "budget", lam2


def _pull_in(ws: _Workspace, z, settings):
    """Find a strictly interior point near z (phase-I with one slack).

    Returns (z, used_iters, ok).  On success the frozen u entries are reset
    just above the squared distances at the pulled-in trajectory.
    """
    delta = settings.interior_margin_rel * ws.scale_ref
    if ws.interior_deficit(z) <= -delta:
        return z, 0, True

    def finish(z_):
        x = z_[ws._ox]
        y = z_[ws._oy]
        z_ = z_.copy()
        z_[ws._ou] = (x**2 + y**2 + ws.h2) * (1.0 + 1e-3)
        return z_

    m_pull = ws.m_bar - ws.n_u_active
    deficit = ws.interior_deficit(z, include_u=False)
    s = max(0.0, deficit) + max(10.0 * delta, 1e-2 * ws.scale_ref)
    if not ws.domain_ok(z, s, pull_in=True):  # pad again if a margin rounded to zero
        s = 2.0 * s + ws.scale_ref
        if not ws.domain_ok(z, s, pull_in=True):
            return z, 0, False
    # start with the barrier center near the current slack so the slack only
    # ever travels downward; small weights would first inflate it to ~m/tau
    tau = m_pull / max(s, 10.0 * delta)
    tau_end = m_pull / (0.1 * delta)
    total = 0
    early = lambda z_, s_: s_ <= -delta
    while total < settings.max_newton_iters:
        z, s, it, status, _ = _center(ws, z, s, tau, True, settings,
                                      settings.max_newton_iters - total, early)
        total += it
        if status == "early" or s <= -delta:
            return finish(z), total, True
        if status == "trouble":
            return z, total, False
        if status == "centered" and s - m_pull / tau > -delta:
            # the optimal slack is within m_pull/tau of s, so the target depth
            # is provably unreachable; settle for any strict interior point
            break
        if tau > tau_end:
            break
        tau *= settings.barrier_mu
    if s < 0.0 and ws.domain_ok(z, 0.0, pull_in=True):
        return finish(z), total, True
    return z, total, False


def solve(program, settings: SolverSettings | None = None) -> SolverResult:
    """Solve the assembled subproblem; deterministic for fixed inputs.

    ``program`` is a ConvexProgram (see trajectory_sca).  A returned status of
    "optimal" certifies strict feasibility (checked by direct evaluation) and
    a duality gap at most opt_tol relative to the objective scale.
    """
    if settings is None:
        settings = SolverSettings()
    ws = _Workspace(program)
    z = ws.pack(program.x_start, program.y_start, program.u_start,
                program.t_start, program.xi_start)

    def result(status, iters, tau, gap):
        x, y, u, t, xi = ws.unpack(z)
        mob, u_m, cone, aff, tb, xib = ws.margins(z, 0.0)
        scaled = [mob.min(), tb.min()]
        if ws.n_u_active:
            scaled.append(u_m[ws.u_active].min())
        if ws.Kr:
            scaled.append(float((cone / (xi + 1.0)).min()))
            scaled.append(float(xib.min()) * ws.scale_ref)
        if ws.Ka:
            scaled.append(aff.min())
        min_margin = float(min(scaled))
        if status == OPTIMAL and min_margin <= 0.0:
            status = TROUBLE
        usable = min_margin > 0.0 and tau > 0
        if usable:
            objective = program.obj_const - ws.f0(z)
            gz = ws.assemble(z, 0.0, tau, False)[0]
            kkt = float(np.abs(gz).max() / tau)
        else:
            objective = -math.inf
            kkt = math.inf
        return SolverResult(x=x, y=y, u=u, t=t, xi=xi, objective=objective,
                            status=status, newton_iters=iters,
                            duality_gap=gap, kkt_residual=kkt,
                            min_margin=min_margin, tau=tau)

    z, used, ok = _pull_in(ws, z, settings)
    if not ok:
        return result(TROUBLE, used, 0.0, math.inf)

    tau = ws.m_bar / settings.tau0_gap
    total = used
    status = MAX_ITER
    gap = math.inf
    while True:
        z, _, it, cstat, lam2 = _center(ws, z, 0.0, tau, False, settings,
                                        settings.max_newton_iters)
        total += it
        if cstat == "trouble":
            return result(TROUBLE, total, tau, math.inf)
        # off-center exits widen the certified gap by sqrt(m)*lambda
        lam_corr = math.sqrt(ws.m_bar * max(lam2, 0.0)) if math.isfinite(lam2) else 0.0
        gap = (ws.m_bar + lam_corr) / tau
        obj_scale = max(1.0, abs(program.obj_const - ws.f0(z)))
        if gap <= settings.opt_tol * obj_scale:
            status = OPTIMAL
            break
        if cstat == "budget" or total >= settings.max_newton_iters:
            status = MAX_ITER
            break
        tau *= settings.barrier_mu
    return result(status, total, tau, gap)
