"""Geodesic flow of the hermitian tangent connection.

Two routes to the endpoint exp_z(v): the second-order normal asymptotic
expansion assembled from closed-form coefficient families, and a classical
fourth-order Runge-Kutta integration of the full jet connection, which
serves as the independent oracle.  A scaling probe fits the error exponent
between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chern import (AsymptoticCoefficients, ConnectionForms, HermitianData,
                    chern_connection, connection_asymptotics,
                    connection_matrix_coordinate)
from .forms import FrameCalculus
from .jets import JetError


class TrustRadiusExit(RuntimeError):
    """Trajectory left the region where the jet data is trusted."""

    def __init__(self, time, radius):
        super().__init__(f"geodesic left |z| <= {radius} at t = {time:.4f}")
        self.time = time
        self.radius = radius


class PackedConnection:
    """Coordinate connection matrix flattened for fast pointwise evaluation."""

    def __init__(self, calc: FrameCalculus, conn: ConnectionForms):
        a_z = connection_matrix_coordinate(calc, conn)
        self.n = calc.n
        rows, cols, comps, alphas, betas, coeffs = [], [], [], [], [], []
        for a, mat in enumerate(a_z):
            for i in range(2 * self.n):
                for j in range(2 * self.n):
                    for (alpha, beta), c in mat[i, j].terms.items():
                        rows.append(i)
                        cols.append(j)
                        comps.append(a)
                        alphas.append(alpha)
                        betas.append(beta)
                        coeffs.append(c)
        self.rows = np.array(rows, dtype=np.intp)
        self.cols = np.array(cols, dtype=np.intp)
        self.comps = np.array(comps, dtype=np.intp)
        self.alphas = np.array(alphas, dtype=np.int64).reshape(-1, self.n)
        self.betas = np.array(betas, dtype=np.int64).reshape(-1, self.n)
        self.coeffs = np.array(coeffs, dtype=complex)

    def acceleration(self, gamma, gdot):
        """Second derivative of the curve: -(A_z(gdot) gdot) on the first
        block; the conjugate block is determined by reality."""
        n = self.n
        v = np.concatenate([gdot, np.conj(gdot)])
        if len(self.coeffs) == 0:
            return np.zeros(n, dtype=complex)
        zb = np.conj(gamma)
        mono = np.prod(gamma[None, :] ** self.alphas, axis=1) \
            * np.prod(zb[None, :] ** self.betas, axis=1)
        vals = self.coeffs * mono * v[self.comps]
        mat = np.zeros((2 * n, 2 * n), dtype=complex)
        np.add.at(mat, (self.rows, self.cols), vals)
        return -(mat @ v)[:n]


@dataclass
class GeodesicResult:
    z: np.ndarray
    v: np.ndarray
    endpoint_asymptotic: np.ndarray
    endpoint_numeric: np.ndarray

    @property
    def error(self):
        return np.abs(self.endpoint_asymptotic - self.endpoint_numeric).max()


def integrate_geodesic(packed: PackedConnection, z, v, steps=256,
                       trust_radius=0.2, return_velocity=False):
    """Classical RK4 on (gamma, gamma-dot) over [0, 1]."""
    gamma = np.asarray(z, dtype=complex).copy()
    gdot = np.asarray(v, dtype=complex).copy()
    h = 1.0 / steps
    for step in range(steps):
        if np.abs(gamma).max() > trust_radius:
            raise TrustRadiusExit(step * h, trust_radius)
        k1g, k1v = gdot, packed.acceleration(gamma, gdot)
        k2g = gdot + 0.5 * h * k1v
        k2v = packed.acceleration(gamma + 0.5 * h * k1g, k2g)
        k3g = gdot + 0.5 * h * k2v
        k3v = packed.acceleration(gamma + 0.5 * h * k2g, k3g)
        k4g = gdot + h * k3v
        k4v = packed.acceleration(gamma + h * k3g, k4g)
        gamma = gamma + (h / 6) * (k1g + 2 * k2g + 2 * k3g + k4g)
        gdot = gdot + (h / 6) * (k1v + 2 * k2v + 2 * k3v + k4v)
    if return_velocity:
        return gamma, gdot
    return gamma


def integrate_geodesic_checked(packed: PackedConnection, z, v, steps=256,
                               trust_radius=0.2, tol=1e-12, max_doublings=4):
    """Integrate, doubling the step count until the endpoint is stable."""
    end = integrate_geodesic(packed, z, v, steps, trust_radius)
    for _ in range(max_doublings):
        steps *= 2
        refined = integrate_geodesic(packed, z, v, steps, trust_radius)
        if np.abs(refined - end).max() < tol:
            return refined
        end = refined
    return end


def exp_asymptotic(coeffs: AsymptoticCoefficients, z, v):
    """Second-order endpoint from the closed-form coefficient families.

    Mirrors the displayed expansion (velocity-squared terms through the
    linear coefficients of the connection, plus the conjugate-velocity
    block from the structure jets) and carries the zbar v vbar completion
    term of the off-diagonal block, so the quadratic part agrees with the
    full connection matrix whenever the families do.
    """
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    n = len(z)
    vb = np.conj(v)
    zb = np.conj(z)
    b1 = coeffs.b_lin
    out = z + v
    for k in range(n):
        acc = 0j
        for p in range(n):
            for l in range(n):
                e_dz = coeffs.h_lin[p, l, k]
                for h in range(n):
                    e_dz += coeffs.s_z_z[p, h, k, l] * z[h] \
                        + coeffs.s_z_zbar[p, h, k, l] * zb[h]
                acc -= 0.5 * e_dz * v[p] * v[l]
                e_dzb = 0j
                for h in range(n):
                    e_dzb += coeffs.s_zbar_z[p, h, k, l] * z[h] \
                        + coeffs.s_zbar_zbar[p, h, k, l] * zb[h]
                acc -= 0.5 * e_dzb * vb[p] * v[l]
                bterm = np.conj(b1[p][k, l])
                for h in range(n):
                    bterm += np.conj(coeffs.b_mixed[p, h][k, l]) * z[h] \
                        + 2 * np.conj(coeffs.b_zz[p, h][k, l]) * zb[h]
                acc += 0.25j * bterm * vb[p] * vb[l]
                for h in range(n):
                    acc += 0.25j * np.conj(coeffs.b_mixed[p, h][k, l]) \
                        * zb[p] * v[h] * vb[l]
        out[k] += acc
    return out


class GeodesicLab:
    """Bundles the asymptotic families and the packed oracle for one germ."""

    def __init__(self, calc: FrameCalculus, hd: HermitianData):
        self.calc = calc
        self.hd = hd
        self.conn = chern_connection(calc, hd)
        self.packed = PackedConnection(calc, self.conn)
        self.coeffs = connection_asymptotics(calc, hd)

    def result(self, z, v, steps=256) -> GeodesicResult:
        z = np.asarray(z, dtype=complex)
        v = np.asarray(v, dtype=complex)
        numeric = integrate_geodesic_checked(self.packed, z, v, steps=steps)
        asym = exp_asymptotic(self.coeffs, z, v)
        return GeodesicResult(z, v, asym, numeric)


NOISE_FLOOR = 1e-13


def error_scaling_probe(lab: GeodesicLab, z, v, scales=(1.0, 0.5, 0.25, 0.125),
                        steps=256):
    """Fit the error exponent of |exp_asym - ode| under joint scaling.

    Returns rows per scale and the fitted log-log slope; scales whose error
    sits at the integrator noise floor are excluded from the fit, and a
    fully flat ladder is reported as exact.
    """
    rows = []
    for s in scales:
        res = lab.result(np.asarray(z, complex) * s, np.asarray(v, complex) * s,
                         steps=steps)
        rows.append({"scale": s, "error": res.error})
    for i in range(1, len(rows)):
        e0, e1 = rows[i - 1]["error"], rows[i]["error"]
        s0, s1 = rows[i - 1]["scale"], rows[i]["scale"]
        if e0 > NOISE_FLOOR and e1 > NOISE_FLOOR:
            rows[i]["slope_partial"] = np.log(e0 / e1) / np.log(s0 / s1)
    usable = [(np.log(r["scale"]), np.log(r["error"])) for r in rows
              if r["error"] > NOISE_FLOOR]
    if len(usable) < 2:
        return {"rows": rows, "slope": None, "exact": True}
    xs = np.array([u[0] for u in usable])
    ys = np.array([u[1] for u in usable])
    slope = np.polyfit(xs, ys, 1)[0]
    return {"rows": rows, "slope": float(slope), "exact": False}


def integrator_convergence_ratio(lab: GeodesicLab, z, v, coarse=4,
                                 reference=1024, floor=1e-14):
    """Endpoint-error ratio under step halving; ~16 for a fourth-order rule."""
    ref = integrate_geodesic(lab.packed, z, v, steps=reference)
    e_coarse = np.abs(integrate_geodesic(lab.packed, z, v, steps=coarse)
                      - ref).max()
    e_fine = np.abs(integrate_geodesic(lab.packed, z, v, steps=2 * coarse)
                    - ref).max()
    if e_fine < floor:
        raise JetError("convergence probe hit the noise floor; use coarser steps")
    return e_coarse / e_fine


def conjugate_block_residual(packed: PackedConnection, z, v):
    """Reality of the connection action: the conjugate block of the assembled
    acceleration must mirror the first block."""
    n = packed.n
    vfull = np.concatenate([np.asarray(v, complex),
                            np.conj(np.asarray(v, complex))])
    gamma = np.asarray(z, complex)
    zb = np.conj(gamma)
    if len(packed.coeffs) == 0:
        return 0.0
    mono = np.prod(gamma[None, :] ** packed.alphas, axis=1) \
        * np.prod(zb[None, :] ** packed.betas, axis=1)
    vals = packed.coeffs * mono * vfull[packed.comps]
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    np.add.at(mat, (packed.rows, packed.cols), vals)
    full = -(mat @ vfull)
    return float(np.abs(full[n:] - np.conj(full[:n])).max())
