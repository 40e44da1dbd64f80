import dataclasses
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from secuav.convex_backend import solve
from secuav.planner import best_effort_trajectory, equal_power
from secuav.scenario import EveRegion, PowerSchedule, Trajectory
from secuav.trajectory_sca import ConvexProgram, assemble, initialize_slacks, solve_step

from conftest import make_scenario

LN2 = math.log(2.0)


def toy_program(n=1, g_u=0.0, p_scaled=1.0, theta_max=30_000.0, h2=10_000.0,
                pins=(0.0, 0.0), step_sq=1.0, t_start=None, u_start=None):
    """Synthetic single-purpose programs exercising one mechanism at a time."""
    zeros = np.zeros(n)
    t0 = 0.5 * (h2 + theta_max) if t_start is None else t_start
    u0 = (pins[0] ** 2 + pins[1] ** 2 + h2) * 1.5 if u_start is None else u_start
    return ConvexProgram(
        n_slots=n, h2=h2, step_sq_max=step_sq,
        pin_start=pins, pin_end=pins,
        p_scaled=np.full(n, p_scaled), g_u=np.full(n, g_u), obj_const=0.0,
        u_fea=np.full(n, u0),
        cone_eve_x=np.empty(0), cone_eve_y=np.empty(0), cone_q2=np.empty(0),
        cone_kx=np.empty((0, n)), cone_ky=np.empty((0, n)), cone_k0=np.empty((0, n)),
        aff_kx=np.zeros((1, n)), aff_ky=np.zeros((1, n)),
        aff_k0=np.full((1, n), theta_max),
        x_start=np.full(n, pins[0]), y_start=np.full(n, pins[1]),
        u_start=np.full(n, u0), t_start=np.full(n, t0),
        xi_start=np.empty((0, n)),
        robust_eve_idx=(), point_eve_idx=(0,),
    )


class TestToyPrograms:
    def test_monotone_objective_rides_to_upper_bound(self):
        # maximize -log2(1 + 1/t) under H^2 <= t <= theta_max
        prog = toy_program(g_u=0.0, p_scaled=1.0, theta_max=30_000.0)
        res = solve(prog)
        assert res.status == "optimal"
        assert res.t[0] >= 30_000.0 - 1e-3 * (30_000.0 - 10_000.0)
        assert res.objective == pytest.approx(-math.log2(1 + 1 / res.t[0]), abs=1e-12)

    def test_projection_pins_u_to_squared_distance(self):
        # maximize -u with u >= x^2 + y^2 + H^2 and (x, y) held near the pins
        prog = toy_program(g_u=1.0, p_scaled=0.0, pins=(30.0, 40.0), step_sq=0.01)
        res = solve(prog)
        assert res.status == "optimal"
        slack = res.u[0] - (res.x[0] ** 2 + res.y[0] ** 2 + prog.h2)
        assert 0.0 < slack <= 1e-4 * res.u[0]
        assert math.hypot(res.x[0] - 30.0, res.y[0] - 40.0) <= 2 * math.sqrt(0.01)

    def test_deterministic_repeat(self):
        prog = toy_program(g_u=1.0, p_scaled=2.5, theta_max=50_000.0, pins=(10.0, -5.0))
        a = solve(prog)
        b = solve(prog)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.t, b.t)
        assert a.objective == b.objective and a.newton_iters == b.newton_iters


# --------------------------------------------------------------------------
# independent cross-check: augmented Lagrangian on the same program data
# --------------------------------------------------------------------------

class _AugLag:
    """Hand-rolled constrained maximizer used only as a test oracle."""

    def __init__(self, prog: ConvexProgram):
        self.p = prog
        self.n = prog.n_slots
        self.kr = prog.cone_q2.shape[0]
        self.ka = prog.aff_kx.shape[0]
        self.width = 4 + self.kr

    def split(self, z):
        z = z.reshape(self.n, self.width)
        return z[:, 0], z[:, 1], z[:, 2], z[:, 3], z[:, 4:].T

    def objective_and_grad(self, z):
        p = self.p
        x, y, u, t, xi = self.split(z)
        obj = p.obj_const - float((p.g_u * u).sum()) - float(
            (np.log1p(p.p_scaled / t) / LN2).sum())
        g = np.zeros((self.n, self.width))
        g[:, 2] = -p.g_u
        g[:, 3] = p.p_scaled / (LN2 * t * (t + p.p_scaled))
        return obj, g.ravel()

    def constraints_and_jac(self, z):
        """g_i(z) <= 0 rows stacked with their gradients."""
        p = self.p
        x, y, u, t, xi = self.split(z)
        xpad = np.concatenate(([p.pin_start[0]], x, [p.pin_end[0]]))
        ypad = np.concatenate(([p.pin_start[1]], y, [p.pin_end[1]]))
        rows = []
        jacs = []

        def add(val, grads):
            rows.append(val)
            j = np.zeros((self.n, self.width))
            for (slot, col), gv in grads.items():
                j[slot, col] += gv
            jacs.append(j.ravel())

        dx = np.diff(xpad)
        dy = np.diff(ypad)
        for j in range(self.n + 1):
            grads = {}
            if j >= 1:  # step tail is slot j-1
                grads[(j - 1, 0)] = -2.0 * dx[j]
                grads[(j - 1, 1)] = -2.0 * dy[j]
            if j <= self.n - 1:  # step head is slot j
                grads[(j, 0)] = grads.get((j, 0), 0.0) + 2.0 * dx[j]
                grads[(j, 1)] = grads.get((j, 1), 0.0) + 2.0 * dy[j]
            add(dx[j] ** 2 + dy[j] ** 2 - p.step_sq_max, grads)
        for s in range(self.n):
            add(x[s] ** 2 + y[s] ** 2 + p.h2 - u[s],
                {(s, 0): 2.0 * x[s], (s, 1): 2.0 * y[s], (s, 2): -1.0})
            add(p.h2 - t[s], {(s, 3): -1.0})
        for k in range(self.kr):
            a = xi[k] + 1.0
            b = p.cone_eve_x[k] - x
            c = p.cone_eve_y[k] - y
            d = p.cone_kx[k] * x + p.cone_ky[k] * y - t - p.cone_q2[k] * xi[k] + p.cone_k0[k]
            for s in range(self.n):
                add(b[s] ** 2 + c[s] ** 2 - a[s] * d[s],
                    {(s, 0): -2.0 * b[s] - a[s] * p.cone_kx[k, s],
                     (s, 1): -2.0 * c[s] - a[s] * p.cone_ky[k, s],
                     (s, 3): a[s],
                     (s, 4 + k): -(d[s] - p.cone_q2[k] * a[s])})
                add(-xi[k, s], {(s, 4 + k): -1.0})
        for k in range(self.ka):
            d = p.aff_kx[k] * x + p.aff_ky[k] * y - t + p.aff_k0[k]
            for s in range(self.n):
                add(-d[s], {(s, 0): -p.aff_kx[k, s], (s, 1): -p.aff_ky[k, s],
                            (s, 3): 1.0})
        return np.array(rows), np.array(jacs)

    def maximize(self, z0, rounds=4, rho=1e6):
        """SQP solve followed by penalty-method polish rounds."""
        def negobj(zz):
            o, g = self.objective_and_grad(zz)
            return -o, -g

        cons = [{"type": "ineq",
                 "fun": lambda zz: -self.constraints_and_jac(zz)[0],
                 "jac": lambda zz: -self.constraints_and_jac(zz)[1]}]
        out = minimize(negobj, z0, jac=True, method="SLSQP", constraints=cons,
                       options={"maxiter": 500, "ftol": 1e-12})
        z = out.x
        mu = np.zeros(self.constraints_and_jac(z)[0].size)
        for _ in range(rounds):
            def negF(zz):
                obj, gobj = self.objective_and_grad(zz)
                gvals, gjac = self.constraints_and_jac(zz)
                act = np.maximum(0.0, mu + rho * gvals)
                val = -obj + float((act**2 - mu**2).sum()) / (2 * rho)
                return val, -gobj + gjac.T @ act

            polished = minimize(negF, z, jac=True, method="L-BFGS-B",
                                options={"maxiter": 400, "ftol": 1e-15,
                                         "gtol": 1e-12})
            gvals, _ = self.constraints_and_jac(polished.x)
            if gvals.max() <= 1e-8:
                z = polished.x
            mu = np.maximum(0.0, mu + rho * self.constraints_and_jac(z)[0])
        return z, self.objective_and_grad(z)[0], self.constraints_and_jac(z)[0]


def random_small_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    k = int(rng.integers(1, 3))
    eves = []
    for _ in range(k):
        # keep disks clear of the flight corridor so the expansion point is
        # never inside one (which would make the subproblem boundary-only)
        q = float(rng.uniform(0.0, 4.0))
        cy = float(rng.choice([-1.0, 1.0]) * (q + n + 1.0 + rng.uniform(0.0, 6.0)))
        cx = float(rng.uniform(-n - 6.0, n + 6.0))
        eves.append(EveRegion(cx, cy, q))
    start = (-float(n), float(rng.uniform(-n, n)))
    end = (float(n), float(rng.uniform(-n, n)))
    scen = make_scenario(
        flight_duration=0.5 * n, n_slots=n, eves=tuple(eves),
        start_xy=start, end_xy=end, v_max=float(rng.uniform(8.0, 14.0)),
        avg_power=1e-3, peak_power=4e-3,
    )
    traj = best_effort_trajectory(scen)
    powers = PowerSchedule(rng.uniform(0.2e-3, 1e-3, n))
    return scen, traj, powers


class TestRandomInstancesAgainstAugLag:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4, 5])
    def test_objective_matches_and_kkt_small(self, seed):
        scen, traj, powers = random_small_instance(seed)
        u_fea, _, _ = initialize_slacks(traj, scen)
        prog = assemble(traj, u_fea, powers, scen)
        res = solve(prog)
        assert res.status == "optimal"
        assert res.min_margin > 0.0
        assert res.kkt_residual <= 1e-6

        oracle = _AugLag(prog)
        z0 = np.zeros((prog.n_slots, oracle.width))
        z0[:, 0] = prog.x_start
        z0[:, 1] = prog.y_start
        z0[:, 2] = prog.u_start
        z0[:, 3] = prog.t_start
        for i in range(oracle.kr):
            z0[:, 4 + i] = prog.xi_start[i]
        z_ref, obj_ref, cons = oracle.maximize(z0.ravel())
        assert cons.max() <= 1e-7  # oracle itself must end feasible
        assert res.objective == pytest.approx(obj_ref, abs=1e-6 * max(1.0, abs(obj_ref)))


class TestScaleRobustness:
    def test_centimeter_units_match_after_unscaling(self):
        scen = make_scenario()
        traj = best_effort_trajectory(scen)
        powers = equal_power(scen)
        u_fea, _, _ = initialize_slacks(traj, scen)
        sol = solve_step(traj, u_fea, powers, scen)
        assert sol.status == "optimal"

        s = 1e-2
        scen2 = dataclasses.replace(
            scen,
            altitude=scen.altitude * s,
            v_max=scen.v_max * s,
            start_xy=(scen.start_xy[0] * s, scen.start_xy[1] * s),
            end_xy=(scen.end_xy[0] * s, scen.end_xy[1] * s),
            gamma0=scen.gamma0 * s**2,
            eves=tuple(EveRegion(e.center_x * s, e.center_y * s, e.radius * s)
                       for e in scen.eves),
        )
        traj2 = Trajectory(xs=traj.xs * s, ys=traj.ys * s)
        u2, _, _ = initialize_slacks(traj2, scen2)
        sol2 = solve_step(traj2, u2, powers, scen2)
        assert sol2.status == "optimal"
        assert np.abs(sol2.trajectory.xs / s - sol.trajectory.xs).max() <= 1e-4
        assert np.abs(sol2.trajectory.ys / s - sol.trajectory.ys).max() <= 1e-4
        assert sol2.true_objective == pytest.approx(sol.true_objective, abs=1e-8)
