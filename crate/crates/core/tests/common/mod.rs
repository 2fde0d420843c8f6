//! Reference computations that share no numerics with the library beyond
//! nalgebra: RK4 shooting for the relative motion, a direct position-space
//! reduced density matrix and angular quadrature with explicit Y_lm.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 2..=l {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Associated Legendre `P_l^m(x)`, `m ≥ 0`, Condon-Shortley phase included.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
        pm0 = pm1;
        pm1 = p;
    }
    pm1
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Complex spherical harmonic as `(re, im)`.
pub fn ylm(l: usize, m: i64, cos_theta: f64, phi: f64) -> (f64, f64) {
    let am = m.unsigned_abs() as usize;
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let mut v = norm * assoc_legendre(l, am, cos_theta);
    if m < 0 && am % 2 == 1 {
        v = -v;
    }
    (v * (m as f64 * phi).cos(), v * (m as f64 * phi).sin())
}

/// Product rule on the sphere: Gauss-Legendre in cos θ times uniform φ.
pub struct SphereRule {
    pub points: Vec<[f64; 3]>,
    pub cos_theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn sphere_rule(n_theta: usize, n_phi: usize) -> SphereRule {
    let (x, w) = gauss_legendre(n_theta);
    let mut rule = SphereRule { points: vec![], cos_theta: vec![], phi: vec![], weights: vec![] };
    for (xi, wi) in x.iter().zip(&w) {
        for j in 0..n_phi {
            let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
            let s = (1.0 - xi * xi).sqrt();
            rule.points.push([s * phi.cos(), s * phi.sin(), *xi]);
            rule.cos_theta.push(*xi);
            rule.phi.push(phi);
            rule.weights.push(wi * 2.0 * PI / n_phi as f64);
        }
    }
    rule
}

/// `∫∫ Y00* Y00* P_k(r̂1·r̂2) Y_{la ma}(r̂1) Y_{lb mb}(r̂2) dΩ1 dΩ2`.
pub fn angular_coulomb_factor(k: usize, la: usize, ma: i64, lb: usize, mb: i64, rule: &SphereRule) -> f64 {
    let y00 = 1.0 / (4.0 * PI).sqrt();
    let ya: Vec<(f64, f64)> = (0..rule.points.len()).map(|i| ylm(la, ma, rule.cos_theta[i], rule.phi[i])).collect();
    let yb: Vec<(f64, f64)> = (0..rule.points.len()).map(|i| ylm(lb, mb, rule.cos_theta[i], rule.phi[i])).collect();
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, p) in rule.points.iter().enumerate() {
        for (j, q) in rule.points.iter().enumerate() {
            let c = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
            let w = rule.weights[i] * rule.weights[j] * legendre_p(k, c);
            let (ar, ai) = ya[i];
            let (br, bi) = yb[j];
            re += w * (ar * br - ai * bi);
            im += w * (ar * bi + ai * br);
        }
    }
    assert!(im.abs() < 1e-10, "imaginary residue {im}");
    re * y00 * y00
}

/// `∫ Y00* Y_lm dΩ`.
pub fn angular_overlap(l: usize, m: i64, rule: &SphereRule) -> f64 {
    let y00 = 1.0 / (4.0 * PI).sqrt();
    (0..rule.points.len()).map(|i| rule.weights[i] * ylm(l, m, rule.cos_theta[i], rule.phi[i]).0 * y00).sum()
}

/// Reduced relative-motion function `u(r)` from RK4 shooting of
/// `−u″ + (ω²r²/4 + 1/r) u = ε u`, tabulated on a uniform mesh.
pub struct RelativeOracle {
    pub omega: f64,
    pub epsilon: f64,
    pub h: f64,
    pub u: Vec<f64>,
}

impl RelativeOracle {
    pub fn total_energy(&self) -> f64 {
        self.epsilon + 1.5 * self.omega
    }

    /// `u(r)/r`, unnormalized; zero beyond the table.
    pub fn phi(&self, r: f64) -> f64 {
        if r < 1e-12 {
            return 1.0;
        }
        let t = r / self.h;
        let i = t.floor() as usize;
        if i + 1 >= self.u.len() {
            return 0.0;
        }
        let f = t - i as f64;
        ((1.0 - f) * self.u[i] + f * self.u[i + 1]) / r
    }

    /// Sign changes of `u` where it exceeds 1e-8 of its peak.
    pub fn sign_changes(&self) -> usize {
        let peak = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sig: Vec<f64> = self.u.iter().copied().filter(|v| v.abs() > 1e-8 * peak).collect();
        sig.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }
}

fn shoot(omega: f64, eps: f64, h: f64, n: usize, keep: bool) -> (f64, Vec<f64>) {
    // y = (u, u'), u ≈ r + r²/2 near the origin
    let f = |r: f64, u: f64| (0.25 * omega * omega * r * r + 1.0 / r - eps) * u;
    let r0 = h * 1e-3;
    let mut r = r0;
    let mut u = r0 + 0.5 * r0 * r0;
    let mut v = 1.0 + r0;
    let mut table = Vec::new();
    if keep {
        table.push(0.0);
    }
    // first partial step to land on the mesh
    let mut step = h - r0;
    for _ in 0..n {
        let k1u = v;
        let k1v = f(r, u);
        let k2u = v + 0.5 * step * k1v;
        let k2v = f(r + 0.5 * step, u + 0.5 * step * k1u);
        let k3u = v + 0.5 * step * k2v;
        let k3v = f(r + 0.5 * step, u + 0.5 * step * k2u);
        let k4u = v + step * k3v;
        let k4v = f(r + step, u + step * k3u);
        u += step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += step;
        step = h;
        if keep {
            table.push(u);
        }
        if u.abs() > 1e200 {
            break;
        }
    }
    (u, table)
}

/// Ground-state relative motion by bisection on the sign of `u(r_end)`.
pub fn relative_oracle(omega: f64) -> RelativeOracle {
    let r_end = 12.0 / omega.sqrt() + 6.0;
    let n = 200_000;
    let h = r_end / n as f64;
    let end = |eps: f64| shoot(omega, eps, h, n, false).0;
    let mut lo = 1.5 * omega;
    let s_lo = end(lo).signum();
    let mut hi = lo;
    let mut de = 0.05 * omega.max(0.05);
    loop {
        hi += de;
        if end(hi).signum() != s_lo {
            break;
        }
        lo = hi;
        de *= 1.5;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if end(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let epsilon = 0.5 * (lo + hi);
    let (_, mut u) = shoot(omega, epsilon, h, n, true);
    // cut the divergent tail at the first local minimum of |u| past the first maximum
    let peak = (1..u.len()).find(|&i| u[i].abs() < u[i - 1].abs()).unwrap_or(u.len() - 1);
    let cut = (peak + 1..u.len()).find(|&i| u[i].abs() > u[i - 1].abs() || u[i] * u[i - 1] <= 0.0).unwrap_or(u.len());
    u.truncate(cut);
    RelativeOracle { omega, epsilon, h, u }
}

/// Closed form at ω = 1/2: `u/r = 1 + r/2` times the Gaussian.
pub fn magic_half_psi(r1: [f64; 3], r2: [f64; 3]) -> f64 {
    let omega: f64 = 0.5;
    let d = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let s = [r1[0] + r2[0], r1[1] + r2[1], r1[2] + r2[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    (1.0 + 0.5 * r) * (-0.25 * omega * r * r).exp() * (-0.25 * omega * s2).exp()
}

/// `ψ(r1, r2) = [u(r)/r] e^{−ω|r1+r2|²/4}` from the shooting table.
pub fn oracle_psi(o: &RelativeOracle, r1: [f64; 3], r2: [f64; 3]) -> f64 {
    let d = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let s = [r1[0] + r2[0], r1[1] + r2[1], r1[2] + r2[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    o.phi(r) * (-0.25 * o.omega * s2).exp()
}

/// Linear and Von Neumann (bits) entropies of the one-electron reduced
/// density matrix, from ψ sampled on a radial Gauss-Legendre grid of
/// `n_r` points on `[0, r_max]` times a product angular rule.
pub fn brute_force_entropies(psi: impl Fn([f64; 3], [f64; 3]) -> f64 + Sync, r_max: f64, n_r: usize, n_theta: usize, n_phi: usize) -> (f64, f64) {
    let (x, w) = gauss_legendre(n_r);
    let rule = sphere_rule(n_theta, n_phi);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for (xi, wi) in x.iter().zip(&w) {
        let r = 0.5 * r_max * (xi + 1.0);
        let wr = 0.5 * r_max * wi * r * r;
        for (p, wa) in rule.points.iter().zip(&rule.weights) {
            pts.push([r * p[0], r * p[1], r * p[2]]);
            wts.push(wr * wa);
        }
    }
    let n = pts.len();
    let sw: Vec<f64> = wts.iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * psi(pts[i], pts[j]) * sw[j]);
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigenvalues();
    let occ: Vec<f64> = eig.iter().map(|l| l * l).collect();
    let total: f64 = occ.iter().sum();
    let p: Vec<f64> = occ.iter().map(|o| o / total).collect();
    let linear = 1.0 - p.iter().map(|q| q * q).sum::<f64>();
    let s = -p.iter().filter(|q| **q > 1e-300).map(|q| q * q.log2()).sum::<f64>();
    (linear, s)
}
