# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled simulation kernels.

One-to-one mirror of slithernav._kernel_py (the pure-numpy reference); see
that module for the calling convention. The inner loops run without the GIL
so parallel episode collectors get real concurrency.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, floor, fmod, sin, sqrt, tanh
from libc.math cimport isfinite as c_isfinite

NAME = "native"

cdef double PI = 3.141592653589793238462643383279502884
cdef double GIMBAL_MARGIN = 0.01


cdef inline void cross3(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline double wrap_pi(double x) noexcept nogil:
    cdef double y = fmod(x + PI, 2.0 * PI)
    if y < 0.0:
        y += 2.0 * PI
    y -= PI
    if y == -PI:
        y = PI
    return y


cdef void euler_rot(double qx, double qy, double qz, double* r) noexcept nogil:
    cdef double cx = cos(qx), sx = sin(qx)
    cdef double cy = cos(qy), sy = sin(qy)
    cdef double cz = cos(qz), sz = sin(qz)
    r[0] = cy * cz
    r[1] = sx * sy * cz - cx * sz
    r[2] = cx * sy * cz + sx * sz
    r[3] = cy * sz
    r[4] = sx * sy * sz + cx * cz
    r[5] = cx * sy * sz - sx * cz
    r[6] = -sy
    r[7] = sx * cy
    r[8] = cx * cy


cdef void rodrigues3(const double* u, double angle, double* r) noexcept nogil:
    cdef double c = cos(angle), s = sin(angle), cc = 1.0 - c
    r[0] = u[0] * u[0] * cc + c
    r[1] = u[0] * u[1] * cc - u[2] * s
    r[2] = u[0] * u[2] * cc + u[1] * s
    r[3] = u[1] * u[0] * cc + u[2] * s
    r[4] = u[1] * u[1] * cc + c
    r[5] = u[1] * u[2] * cc - u[0] * s
    r[6] = u[2] * u[0] * cc - u[1] * s
    r[7] = u[2] * u[1] * cc + u[0] * s
    r[8] = u[2] * u[2] * cc + c


cdef inline void mat3_mul(const double* a, const double* b, double* out) noexcept nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j]


cdef inline void mat3_vec(const double* a, const double* v, double* out) noexcept nogil:
    cdef int i
    for i in range(3):
        out[i] = a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2]


cdef void euler_rate(double qy, double qz, double* e) noexcept nogil:
    # columns: world axes of the elementary x, y, z rotations
    cdef double cb = cos(qy), sb = sin(qy)
    cdef double cc = cos(qz), sc = sin(qz)
    e[0] = cb * cc
    e[1] = -sc
    e[2] = 0.0
    e[3] = cb * sc
    e[4] = cc
    e[5] = 0.0
    e[6] = -sb
    e[7] = 0.0
    e[8] = 1.0


cdef void euler_bias(double qy, double qz, const double* rates, double* out) noexcept nogil:
    cdef double cb = cos(qy), sb = sin(qy)
    cdef double cc = cos(qz), sc = sin(qz)
    cdef double ea[3]
    cdef double eb[3]
    cdef double ec[3]
    cdef double t1[3]
    cdef double t2[3]
    cdef double ea_dot[3]
    cdef double eb_dot[3]
    cdef int i
    ea[0] = cb * cc; ea[1] = cb * sc; ea[2] = -sb
    eb[0] = -sc; eb[1] = cc; eb[2] = 0.0
    ec[0] = 0.0; ec[1] = 0.0; ec[2] = 1.0
    cross3(ec, ea, t1)
    cross3(eb, ea, t2)
    for i in range(3):
        ea_dot[i] = rates[2] * t1[i] + rates[1] * t2[i]
    cross3(ec, eb, t1)
    for i in range(3):
        eb_dot[i] = rates[2] * t1[i]
    for i in range(3):
        out[i] = rates[0] * ea_dot[i] + rates[1] * eb_dot[i]


cdef class Engine:
    """Scratch-space owner for one robot model + environment."""

    cdef int n, nb, ndof, nc
    cdef double[:, ::1] axes, jpos, com, coff
    cdef double[::1] mass
    cdef double[:, :, ::1] inertia
    cdef int[::1] cbody
    # ground
    cdef int has_ground
    cdef double k1, k2, mu_c, mu_s, mu_v, v_s, v_eps, m_eff
    # walls
    cdef int has_walls, wh, ww
    cdef unsigned char[:, ::1] occ
    cdef double wox, woy, wcs
    # scratch
    cdef double[:, :, ::1] R, jv, beta, iw, cjac
    cdef double[:, ::1] d, pcm, aw, omega, alpha, acm, cpts, cvel, cfor, dmat, chol, iwb
    cdef double[::1] evec, hvec, rhs, qdd, ebias, cholw

    def __init__(self, pack, ground, walls, cbody, coff):
        n, axes, jpos, com, mass, inertia = pack
        self.n = n
        self.nb = n + 1
        self.ndof = n + 6
        self.axes = np.ascontiguousarray(axes, dtype=np.float64) if n else np.zeros((0, 3))
        self.jpos = np.ascontiguousarray(jpos, dtype=np.float64) if n else np.zeros((0, 3))
        self.com = np.ascontiguousarray(com, dtype=np.float64)
        self.mass = np.ascontiguousarray(mass, dtype=np.float64)
        self.inertia = np.ascontiguousarray(inertia, dtype=np.float64)
        self.cbody = np.ascontiguousarray(cbody, dtype=np.int32)
        self.coff = np.ascontiguousarray(coff, dtype=np.float64)
        self.nc = self.cbody.shape[0]
        if ground is not None:
            self.has_ground = 1
            self.k1, self.k2, self.mu_c, self.mu_s, self.mu_v, self.v_s, self.v_eps = ground
            self.m_eff = float(np.sum(mass)) / max(self.nc, 1)
        else:
            self.has_ground = 0
        if walls is not None:
            occ, ox, oy, cs = walls
            self.has_walls = 1
            self.occ = np.ascontiguousarray(occ, dtype=np.uint8)
            self.wh = self.occ.shape[0]
            self.ww = self.occ.shape[1]
            self.wox = ox
            self.woy = oy
            self.wcs = cs
        else:
            self.has_walls = 0
        nb, ndof, nc = self.nb, self.ndof, max(self.nc, 1)
        self.R = np.zeros((nb, 3, 3))
        self.d = np.zeros((nb, 3))
        self.pcm = np.zeros((nb, 3))
        self.aw = np.zeros((max(n, 1), 3))
        self.evec = np.zeros(9)
        self.jv = np.zeros((nb, 3, ndof))
        self.beta = np.zeros((nb, 3, ndof))
        self.iw = np.zeros((nb, 3, 3))
        self.iwb = np.zeros((3, ndof))
        self.omega = np.zeros((nb, 3))
        self.alpha = np.zeros((nb, 3))
        self.acm = np.zeros((nb, 3))
        self.cpts = np.zeros((nc, 3))
        self.cvel = np.zeros((nc, 3))
        self.cfor = np.zeros((nc, 3))
        self.cjac = np.zeros((nc, 3, ndof))
        self.dmat = np.zeros((ndof, ndof))
        self.chol = np.zeros((ndof, ndof))
        self.cholw = np.zeros(ndof)
        self.hvec = np.zeros(ndof)
        self.rhs = np.zeros(ndof)
        self.qdd = np.zeros(ndof)
        self.ebias = np.zeros(3)

    cdef void kinematics_c(self, const double* q) noexcept nogil:
        cdef int j, i
        cdef double rj[9]
        cdef double tmp[3]
        euler_rot(q[self.n + 3], q[self.n + 4], q[self.n + 5], &self.R[0, 0, 0])
        for i in range(3):
            self.d[0, i] = q[self.n + i]
        mat3_vec(&self.R[0, 0, 0], &self.com[0, 0], tmp)
        for i in range(3):
            self.pcm[0, i] = self.d[0, i] + tmp[i]
        for j in range(1, self.nb):
            rodrigues3(&self.axes[j - 1, 0], q[j - 1], rj)
            mat3_mul(&self.R[j - 1, 0, 0], rj, &self.R[j, 0, 0])
            mat3_vec(&self.R[j - 1, 0, 0], &self.jpos[j - 1, 0], tmp)
            for i in range(3):
                self.d[j, i] = self.d[j - 1, i] + tmp[i]
            mat3_vec(&self.R[j, 0, 0], &self.com[j, 0], tmp)
            for i in range(3):
                self.pcm[j, i] = self.d[j, i] + tmp[i]

    cdef void axes_and_e_c(self, const double* q) noexcept nogil:
        cdef int j
        for j in range(self.n):
            mat3_vec(&self.R[j, 0, 0], &self.axes[j, 0], &self.aw[j, 0])
        euler_rate(q[self.n + 4], q[self.n + 5], &self.evec[0])

    cdef void point_jac_c(self, const double* q, const double* pt, int body, double* jac) noexcept nogil:
        """Fill one 3 x ndof point Jacobian (row-major)."""
        cdef int j, k, r
        cdef double rel[3]
        cdef double col[3]
        cdef double ecol[3]
        cdef int ndof = self.ndof
        for r in range(3 * ndof):
            jac[r] = 0.0
        for j in range(self.n):
            if j < body:
                rel[0] = pt[0] - self.d[j + 1, 0]
                rel[1] = pt[1] - self.d[j + 1, 1]
                rel[2] = pt[2] - self.d[j + 1, 2]
                cross3(&self.aw[j, 0], rel, col)
                for r in range(3):
                    jac[r * ndof + j] = col[r]
        for r in range(3):
            jac[r * ndof + self.n + r] = 1.0
        rel[0] = pt[0] - q[self.n]
        rel[1] = pt[1] - q[self.n + 1]
        rel[2] = pt[2] - q[self.n + 2]
        for k in range(3):
            ecol[0] = self.evec[k]
            ecol[1] = self.evec[3 + k]
            ecol[2] = self.evec[6 + k]
            cross3(ecol, rel, col)
            for r in range(3):
                jac[r * ndof + self.n + 3 + k] = col[r]

    cdef void jacobians_c(self, const double* q) noexcept nogil:
        cdef int b, j, r, k
        cdef int ndof = self.ndof
        for b in range(self.nb):
            self.point_jac_c(q, &self.pcm[b, 0], b, &self.jv[b, 0, 0])
            for r in range(3):
                for k in range(ndof):
                    self.beta[b, r, k] = 0.0
            for j in range(self.n):
                if j < b:
                    for r in range(3):
                        self.beta[b, r, j] = self.aw[j, r]
            for k in range(3):
                for r in range(3):
                    self.beta[b, r, self.n + 3 + k] = self.evec[3 * r + k]

    cdef void bias_c(self, const double* q, const double* qd) noexcept nogil:
        cdef int j, i
        cdef double a_w[3]
        cdef double t1[3]
        cdef double t2[3]
        cdef double t3[3]
        cdef double off[3]
        cdef double rc[3]
        cdef double ad[3]
        euler_rate(q[self.n + 4], q[self.n + 5], &self.evec[0])
        for i in range(3):
            self.omega[0, i] = (
                self.evec[3 * i] * qd[self.n + 3]
                + self.evec[3 * i + 1] * qd[self.n + 4]
                + self.evec[3 * i + 2] * qd[self.n + 5]
            )
        euler_bias(q[self.n + 4], q[self.n + 5], qd + self.n + 3, &self.alpha[0, 0])
        ad[0] = ad[1] = ad[2] = 0.0
        mat3_vec(&self.R[0, 0, 0], &self.com[0, 0], rc)
        cross3(&self.alpha[0, 0], rc, t1)
        cross3(&self.omega[0, 0], rc, t2)
        cross3(&self.omega[0, 0], t2, t3)
        for i in range(3):
            self.acm[0, i] = ad[i] + t1[i] + t3[i]
        for j in range(1, self.nb):
            mat3_vec(&self.R[j - 1, 0, 0], &self.axes[j - 1, 0], a_w)
            cross3(&self.omega[j - 1, 0], a_w, t1)
            for i in range(3):
                self.omega[j, i] = self.omega[j - 1, i] + qd[j - 1] * a_w[i]
                self.alpha[j, i] = self.alpha[j - 1, i] + qd[j - 1] * t1[i]
            mat3_vec(&self.R[j - 1, 0, 0], &self.jpos[j - 1, 0], off)
            cross3(&self.alpha[j - 1, 0], off, t1)
            cross3(&self.omega[j - 1, 0], off, t2)
            cross3(&self.omega[j - 1, 0], t2, t3)
            for i in range(3):
                ad[i] = ad[i] + t1[i] + t3[i]
            mat3_vec(&self.R[j, 0, 0], &self.com[j, 0], rc)
            cross3(&self.alpha[j, 0], rc, t1)
            cross3(&self.omega[j, 0], rc, t2)
            cross3(&self.omega[j, 0], t2, t3)
            for i in range(3):
                self.acm[j, i] = ad[i] + t1[i] + t3[i]

    cdef void assemble_c(self, const double* q, const double* qd, double gravity) noexcept nogil:
        """Fill dmat and hvec (mass matrix and bias)."""
        cdef int b, i, j, r, s, k
        cdef int ndof = self.ndof
        cdef double acc, m_b
        cdef double tmp[9]
        cdef double f[3]
        cdef double tau[3]
        cdef double t1[3]
        self.kinematics_c(q)
        self.axes_and_e_c(q)
        self.jacobians_c(q)
        self.bias_c(q, qd)
        for i in range(ndof):
            self.hvec[i] = 0.0
            for j in range(ndof):
                self.dmat[i, j] = 0.0
        for b in range(self.nb):
            m_b = self.mass[b]
            # iw = R I R^T
            for i in range(3):
                for j in range(3):
                    tmp[3 * i + j] = (
                        self.R[b, i, 0] * self.inertia[b, 0, j]
                        + self.R[b, i, 1] * self.inertia[b, 1, j]
                        + self.R[b, i, 2] * self.inertia[b, 2, j]
                    )
            for i in range(3):
                for j in range(3):
                    self.iw[b, i, j] = (
                        tmp[3 * i] * self.R[b, j, 0]
                        + tmp[3 * i + 1] * self.R[b, j, 1]
                        + tmp[3 * i + 2] * self.R[b, j, 2]
                    )
            # iwb = iw @ beta
            for r in range(3):
                for k in range(ndof):
                    self.iwb[r, k] = (
                        self.iw[b, r, 0] * self.beta[b, 0, k]
                        + self.iw[b, r, 1] * self.beta[b, 1, k]
                        + self.iw[b, r, 2] * self.beta[b, 2, k]
                    )
            for i in range(ndof):
                for j in range(i, ndof):
                    acc = 0.0
                    for r in range(3):
                        acc += m_b * self.jv[b, r, i] * self.jv[b, r, j]
                        acc += self.beta[b, r, i] * self.iwb[r, j]
                    self.dmat[i, j] += acc
            # bias force and torque
            for r in range(3):
                f[r] = m_b * self.acm[b, r]
            f[2] += m_b * gravity
            mat3_vec(&self.iw[b, 0, 0], &self.omega[b, 0], t1)
            cross3(&self.omega[b, 0], t1, tau)
            mat3_vec(&self.iw[b, 0, 0], &self.alpha[b, 0], t1)
            for r in range(3):
                tau[r] += t1[r]
            for i in range(ndof):
                self.hvec[i] += (
                    self.jv[b, 0, i] * f[0]
                    + self.jv[b, 1, i] * f[1]
                    + self.jv[b, 2, i] * f[2]
                    + self.beta[b, 0, i] * tau[0]
                    + self.beta[b, 1, i] * tau[1]
                    + self.beta[b, 2, i] * tau[2]
                )
        # symmetrize lower triangle
        for i in range(ndof):
            for j in range(i + 1, ndof):
                self.dmat[j, i] = self.dmat[i, j]

    cdef int contact_c(self, const double* q, const double* qd, double dt) noexcept nogil:
        """Contact point states and forces; accumulates J^T F into rhs."""
        cdef int p, b, i, r
        cdef double tmp[3]
        cdef double pz, vz, fz, vi, s2, v_reg, slope_max, x, y, vn, mag, depth, best_depth, best_sign
        cdef int ix, iy, best_axis
        cdef int ndof = self.ndof
        slope_max = 0.5 * self.m_eff / dt
        for p in range(self.nc):
            b = self.cbody[p]
            mat3_vec(&self.R[b, 0, 0], &self.coff[p, 0], tmp)
            for i in range(3):
                self.cpts[p, i] = self.d[b, i] + tmp[i]
            self.point_jac_c(q, &self.cpts[p, 0], b, &self.cjac[p, 0, 0])
            for r in range(3):
                self.cvel[p, r] = 0.0
                for i in range(ndof):
                    self.cvel[p, r] += self.cjac[p, r, i] * qd[i]
            # ground force
            pz = self.cpts[p, 2]
            vz = self.cvel[p, 2]
            if pz <= 0.0:
                fz = -self.k1 * pz - self.k2 * vz
                if fz < 0.0:
                    fz = 0.0
                for i in range(2):
                    vi = self.cvel[p, i]
                    s2 = self.mu_c - (self.mu_c - self.mu_s) * exp(-(vi * vi) / (self.v_s * self.v_s))
                    v_reg = s2 * fz / slope_max
                    if v_reg < self.v_eps:
                        v_reg = self.v_eps
                    self.cfor[p, i] = -s2 * fz * tanh(vi / v_reg) - self.mu_v * vi
                self.cfor[p, 2] = fz
            else:
                self.cfor[p, 0] = 0.0
                self.cfor[p, 1] = 0.0
                self.cfor[p, 2] = 0.0
            # wall push-out
            if self.has_walls:
                x = self.cpts[p, 0]
                y = self.cpts[p, 1]
                ix = <int>floor((x - self.wox) / self.wcs)
                iy = <int>floor((y - self.woy) / self.wcs)
                if 0 <= ix < self.ww and 0 <= iy < self.wh and self.occ[iy, ix]:
                    best_depth = 1e300
                    best_axis = -1
                    best_sign = 0.0
                    if ix + 1 < self.ww and not self.occ[iy, ix + 1]:
                        depth = (self.wox + (ix + 1) * self.wcs) - x
                        if depth < best_depth:
                            best_depth = depth; best_axis = 0; best_sign = 1.0
                    if ix - 1 >= 0 and not self.occ[iy, ix - 1]:
                        depth = x - (self.wox + ix * self.wcs)
                        if depth < best_depth:
                            best_depth = depth; best_axis = 0; best_sign = -1.0
                    if iy + 1 < self.wh and not self.occ[iy + 1, ix]:
                        depth = (self.woy + (iy + 1) * self.wcs) - y
                        if depth < best_depth:
                            best_depth = depth; best_axis = 1; best_sign = 1.0
                    if iy - 1 >= 0 and not self.occ[iy - 1, ix]:
                        depth = y - (self.woy + iy * self.wcs)
                        if depth < best_depth:
                            best_depth = depth; best_axis = 1; best_sign = -1.0
                    if best_axis >= 0:
                        vn = best_sign * self.cvel[p, best_axis]
                        mag = self.k1 * best_depth - self.k2 * vn
                        if mag > 0.0:
                            self.cfor[p, best_axis] += best_sign * mag
            for i in range(ndof):
                self.rhs[i] += (
                    self.cjac[p, 0, i] * self.cfor[p, 0]
                    + self.cjac[p, 1, i] * self.cfor[p, 1]
                    + self.cjac[p, 2, i] * self.cfor[p, 2]
                )
        return 0

    cdef int solve_c(self) noexcept nogil:
        """Cholesky solve dmat @ qdd = rhs."""
        cdef int i, j, k
        cdef int ndof = self.ndof
        cdef double acc
        for i in range(ndof):
            for j in range(i + 1):
                acc = self.dmat[i, j]
                for k in range(j):
                    acc -= self.chol[i, k] * self.chol[j, k]
                if i == j:
                    if acc <= 0.0:
                        return 1
                    self.chol[i, i] = sqrt(acc)
                else:
                    self.chol[i, j] = acc / self.chol[j, j]
        for i in range(ndof):
            acc = self.rhs[i]
            for k in range(i):
                acc -= self.chol[i, k] * self.cholw[k]
            self.cholw[i] = acc / self.chol[i, i]
        for i in range(ndof - 1, -1, -1):
            acc = self.cholw[i]
            for k in range(i + 1, ndof):
                acc -= self.chol[k, i] * self.qdd[k]
            self.qdd[i] = acc / self.chol[i, i]
        return 0

    cdef int step_once_c(self, double* q, double* qd, const double* u, double dt, double gravity) noexcept nogil:
        """One semi-implicit Euler step; returns gimbal-clamp count or -1 on failure."""
        cdef int i
        cdef int n = self.n
        cdef int clamps = 0
        cdef double lim
        self.assemble_c(q, qd, gravity)
        for i in range(self.ndof):
            self.rhs[i] = -self.hvec[i]
        if u != NULL:
            for i in range(n):
                self.rhs[i] += u[i]
        if self.has_ground and self.nc > 0:
            self.contact_c(q, qd, dt)
        if self.solve_c():
            return -1
        for i in range(self.ndof):
            qd[i] += dt * self.qdd[i]
            q[i] += dt * qd[i]
        q[n + 3] = wrap_pi(q[n + 3])
        q[n + 5] = wrap_pi(q[n + 5])
        lim = PI / 2.0 - GIMBAL_MARGIN
        if fabs(q[n + 4]) > lim:
            q[n + 4] = lim if q[n + 4] > 0.0 else -lim
            qd[n + 4] = 0.0
            clamps = 1
        for i in range(self.ndof):
            if not c_isfinite(q[i]) or not c_isfinite(qd[i]):
                return -1
        return clamps


def kinematics(pack, q):
    eng = Engine(pack, None, None, np.zeros(0, dtype=np.int32), np.zeros((0, 3)))
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    eng.kinematics_c(&qv[0])
    return np.asarray(eng.R).copy(), np.asarray(eng.d).copy(), np.asarray(eng.pcm).copy()


def body_jacobians(pack, q):
    eng = Engine(pack, None, None, np.zeros(0, dtype=np.int32), np.zeros((0, 3)))
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    eng.kinematics_c(&qv[0])
    eng.axes_and_e_c(&qv[0])
    eng.jacobians_c(&qv[0])
    return np.asarray(eng.jv).copy(), np.asarray(eng.beta).copy()


def dynamics(pack, q, qd, gravity):
    eng = Engine(pack, None, None, np.zeros(0, dtype=np.int32), np.zeros((0, 3)))
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=np.float64)
    eng.assemble_c(&qv[0], &qdv[0], gravity)
    return np.asarray(eng.dmat).copy(), np.asarray(eng.hvec).copy()


def contact_points(pack, q, cbody, coff):
    eng = Engine(pack, None, None, cbody, coff)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    eng.kinematics_c(&qv[0])
    cdef int p, i, b
    cdef double tmp[3]
    out = np.zeros((eng.nc, 3))
    cdef double[:, ::1] ov = out
    for p in range(eng.nc):
        b = eng.cbody[p]
        mat3_vec(&eng.R[b, 0, 0], &eng.coff[p, 0], tmp)
        for i in range(3):
            ov[p, i] = eng.d[b, i] + tmp[i]
    return out


def contact_state(pack, q, qd, cbody, coff):
    eng = Engine(pack, None, None, cbody, coff)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=np.float64)
    eng.kinematics_c(&qv[0])
    eng.axes_and_e_c(&qv[0])
    cdef int p, i, r, b
    cdef double tmp[3]
    pts = np.zeros((eng.nc, 3))
    vel = np.zeros((eng.nc, 3))
    cdef double[:, ::1] pv = pts
    cdef double[:, ::1] vv = vel
    for p in range(eng.nc):
        b = eng.cbody[p]
        mat3_vec(&eng.R[b, 0, 0], &eng.coff[p, 0], tmp)
        for i in range(3):
            pv[p, i] = eng.d[b, i] + tmp[i]
        eng.point_jac_c(&qv[0], &pv[p, 0], b, &eng.cjac[p, 0, 0])
        for r in range(3):
            for i in range(eng.ndof):
                vv[p, r] += eng.cjac[p, r, i] * qdv[i]
    return pts, vel


def contact_jacobian(pack, q, cbody, coff):
    eng = Engine(pack, None, None, cbody, coff)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    eng.kinematics_c(&qv[0])
    eng.axes_and_e_c(&qv[0])
    cdef int p, i, b
    cdef double tmp[3]
    cdef double pt[3]
    for p in range(eng.nc):
        b = eng.cbody[p]
        mat3_vec(&eng.R[b, 0, 0], &eng.coff[p, 0], tmp)
        for i in range(3):
            pt[i] = eng.d[b, i] + tmp[i]
        eng.point_jac_c(&qv[0], pt, b, &eng.cjac[p, 0, 0])
    return np.asarray(eng.cjac).reshape(eng.nc * 3, eng.ndof).copy()


def physics_steps(pack, ground, walls, q, qd, u, n_steps, dt, gravity, cbody, coff):
    eng = Engine(pack, ground, walls, cbody, coff)
    q_arr = np.array(q, dtype=np.float64)
    qd_arr = np.array(qd, dtype=np.float64)
    cdef double[::1] qv = q_arr
    cdef double[::1] qdv = qd_arr
    cdef double[::1] uv
    cdef double* uptr = NULL
    if u is not None:
        uv = np.ascontiguousarray(u, dtype=np.float64)
        if eng.n > 0:
            uptr = &uv[0]
    cdef int k, res
    cdef int gimbal = 0
    cdef int done = 0
    cdef int ok = 1
    cdef int nst = n_steps
    cdef double dt_c = dt, g_c = gravity
    with nogil:
        for k in range(nst):
            res = eng.step_once_c(&qv[0], &qdv[0], uptr, dt_c, g_c)
            done = k + 1
            if res < 0:
                ok = 0
                break
            gimbal += res
    return q_arr, qd_arr, gimbal, done, bool(ok)


def control_ticks(pack, ground, walls, q, qd, targets, gains, pid_integ, pid_prev,
                  n_sub, dt, gravity, cbody, coff):
    eng = Engine(pack, ground, walls, cbody, coff)
    cdef int n = eng.n
    q_arr = np.array(q, dtype=np.float64)
    qd_arr = np.array(qd, dtype=np.float64)
    integ_arr = np.array(pid_integ, dtype=np.float64)
    prev_arr = np.array(pid_prev, dtype=np.float64)
    cdef double[::1] qv = q_arr
    cdef double[::1] qdv = qd_arr
    cdef double[::1] integv = integ_arr
    cdef double[::1] prevv = prev_arr
    cdef double[:, ::1] tgt = np.ascontiguousarray(targets, dtype=np.float64)
    cdef double kp, ki, kd, u_max, i_max
    kp, ki, kd, u_max, i_max = gains
    cdef int nticks = tgt.shape[0]
    rec_joints = np.zeros((nticks, n))
    rec_com = np.zeros((nticks, 3))
    rec_head = np.zeros((nticks, 3))
    head_v_prev = np.array(qd_arr[n : n + 3], dtype=np.float64)
    cdef double[:, ::1] rjv = rec_joints
    cdef double[:, ::1] rcv = rec_com
    cdef double[:, ::1] rhv = rec_head
    cdef double[::1] hvp = head_v_prev
    cdef double[::1] uvec = np.zeros(max(n, 1))
    cdef double total_mass = float(np.sum(np.asarray(pack[4])))
    cdef int t, s, j, i, res
    cdef int gimbal = 0
    cdef int ticks_done = 0
    cdef int ok = 1
    cdef int nsub_c = n_sub
    cdef double dt_c = dt, g_c = gravity
    cdef double err, derr, uval, acc
    with nogil:
        for t in range(nticks):
            for s in range(nsub_c):
                for i in range(3):
                    hvp[i] = qdv[n + i]
                for j in range(n):
                    err = tgt[t, j] - qv[j]
                    integv[j] += err * dt_c
                    if integv[j] > i_max:
                        integv[j] = i_max
                    elif integv[j] < -i_max:
                        integv[j] = -i_max
                    derr = (err - prevv[j]) / dt_c
                    prevv[j] = err
                    uval = kp * err + ki * integv[j] + kd * derr
                    if uval > u_max:
                        uval = u_max
                    elif uval < -u_max:
                        uval = -u_max
                    uvec[j] = uval
                res = eng.step_once_c(&qv[0], &qdv[0], &uvec[0], dt_c, g_c)
                if res < 0:
                    ok = 0
                    break
                gimbal += res
            ticks_done = t + 1
            if not ok:
                break
            # per-tick records
            eng.kinematics_c(&qv[0])
            for j in range(n):
                rjv[t, j] = qv[j]
            acc = 0.0
            for i in range(3):
                rcv[t, i] = 0.0
            for j in range(eng.nb):
                for i in range(3):
                    rcv[t, i] += eng.mass[j] * eng.pcm[j, i]
            for i in range(3):
                rcv[t, i] /= total_mass
                rhv[t, i] = qv[n + i]
    return (q_arr, qd_arr, integ_arr, prev_arr, rec_joints, rec_com, rec_head,
            head_v_prev, gimbal, ticks_done, bool(ok))


def cpg_rollout(phi, r, rdot, amp, omega, theta, delta, gain_a, mu, n_steps, dt):
    phi_arr = np.array(phi, dtype=np.float64)
    r_arr = np.array(r, dtype=np.float64)
    rdot_arr = np.array(rdot, dtype=np.float64)
    cdef double[::1] phiv = phi_arr
    cdef double[::1] rv = r_arr
    cdef double[::1] rdv = rdot_arr
    cdef double[::1] muv = np.ascontiguousarray(mu, dtype=np.float64)
    cdef int k = phi_arr.shape[0]
    cdef int nst = n_steps
    out = np.empty((n_steps, k))
    r_traj = np.empty((n_steps, k))
    cdef double[:, ::1] outv = out
    cdef double[:, ::1] rtv = r_traj
    cdef double[::1] dphi = np.zeros(k)
    cdef double amp_c = amp, om_c = omega, th_c = theta, de_c = delta, a_c = gain_a, dt_c = dt
    cdef int s, i
    cdef double rdd
    with nogil:
        for s in range(nst):
            dphi[0] = om_c + muv[0] * (phiv[1] - phiv[0]) + th_c
            for i in range(1, k - 1):
                dphi[i] = om_c + muv[i] * (phiv[i - 1] - 2.0 * phiv[i] + phiv[i + 1])
            dphi[k - 1] = om_c + muv[k - 1] * (phiv[k - 2] - phiv[k - 1]) - th_c
            for i in range(k):
                rdd = a_c * ((a_c / 4.0) * (amp_c - rv[i]) - rdv[i])
                phiv[i] += dt_c * dphi[i]
                rdv[i] += dt_c * rdd
                rv[i] += dt_c * rdv[i]
                outv[s, i] = rv[i] * sin(phiv[i]) + de_c
                rtv[s, i] = rv[i]
    return out, r_traj, phi_arr, r_arr, rdot_arr
