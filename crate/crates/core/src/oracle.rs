//! Independent reference computations used by tests and the `verify` suites.
//!
//! Nothing here is on the production path except [`emission_time`], which the
//! ground-truth comparison uses by design.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::geom::Vec3;
use crate::rgf::RgfSlice;
use crate::scenario::{SourceKind, SourceSpec};
use crate::{Error, Result, C64};

const BISECT_ITER: usize = 200;

/// Bisection for the root of an increasing function, expanding the bracket
/// around `guess` as needed.
fn bisect_increasing(mut f: impl FnMut(f64) -> Result<f64>, guess: f64) -> Result<f64> {
    let mut width = 1.0;
    let (mut lo, mut hi) = (guess - width, guess + width);
    let mut expansions = 0;
    while f(lo)? > 0.0 || f(hi)? < 0.0 {
        width *= 2.0;
        lo = guess - width;
        hi = guess + width;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::NoConvergence { t: guess, residual: f64::NAN });
        }
    }
    for _ in 0..BISECT_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// t_k(τ): root of t + p_z(t)/c = τ.
pub fn emission_time(src: &SourceSpec, tau: f64, c: f64) -> Result<f64> {
    bisect_increasing(|t| Ok(t + src.position[2].eval(t)? / c - tau), tau)
}

/// Retarded time s with t = s + |r − p(s)|/c, by bisection.
pub fn retarded_time_bisect(src: &SourceSpec, t: f64, r: Vec3, c: f64) -> Result<f64> {
    bisect_increasing(|s| Ok(s + (r - src.position(s)?).norm() / c - t), t)
}

/// φ = ∂_r u on |r| = R for a stationary point source at the origin inside a
/// sound-soft ball, by the radial reflection series. `q_dot` is the time
/// derivative of the magnitude, which must vanish for negative arguments.
pub fn radial_image_series(q_dot: impl Fn(f64) -> f64, radius: f64, c: f64, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 0;
    loop {
        let s = t - (2 * m + 1) as f64 * radius / c;
        if s < 0.0 {
            break;
        }
        sum += q_dot(s);
        m += 1;
    }
    -sum / (2.0 * core::f64::consts::PI * c * radius)
}

/// Σ_k w_k p_k^n for n = 0..len.
pub fn power_sums(weights: &[C64], nodes: &[C64], len: usize) -> Vec<C64> {
    (0..len)
        .map(|n| weights.iter().zip(nodes).map(|(w, p)| w * p.powu(n as u32)).sum())
        .collect()
}

/// a + b·sin(ωt + φ) with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub offset: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Harmonic {
    pub fn constant(v: f64) -> Self {
        Harmonic { offset: v, amplitude: 0.0, omega: 0.0, phase: 0.0 }
    }

    /// Value and first three derivatives.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        let a = self.omega * t + self.phase;
        let (s, c) = (libm::sin(a), libm::cos(a));
        let b = self.amplitude;
        let w = self.omega;
        [self.offset + b * s, b * w * c, -b * w * w * s, -b * w * w * w * c]
    }
}

/// A source with closed-form trajectory and strength, for synthetic moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSource {
    pub kind: SourceKind,
    pub position: [Harmonic; 3],
    /// Real and imaginary part of the strength (q for points, m_x + i m_y for dipoles).
    pub strength: [Harmonic; 2],
}

/// Ground truth of one source at a slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceTruth {
    pub t_emit: f64,
    pub position: Vec3,
    pub strength: C64,
    pub xi: f64,
    /// d_τ of p_z∘t_k.
    pub dz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    v: C64,
    d1: C64,
    d2: C64,
}

impl Jet {
    fn real(v: [f64; 3]) -> Jet {
        Jet { v: C64::new(v[0], 0.0), d1: C64::new(v[1], 0.0), d2: C64::new(v[2], 0.0) }
    }

    fn constant(v: f64) -> Jet {
        Jet::real([v, 0.0, 0.0])
    }

    fn conj(self) -> Jet {
        Jet { v: self.v.conj(), d1: self.d1.conj(), d2: self.d2.conj() }
    }

    fn scale(self, s: f64) -> Jet {
        Jet { v: self.v * s, d1: self.d1 * s, d2: self.d2 * s }
    }

    fn powu(self, n: u32) -> Jet {
        (0..n).fold(Jet::constant(1.0), |acc, _| acc * self)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + self.d1 * o.d1 * 2.0 + self.v * o.d2,
        }
    }
}

struct SourceJets {
    zeta: Jet,
    p: Jet,
    pz: Jet,
    truth: SliceTruth,
}

impl AnalyticSource {
    fn pz(&self, t: f64) -> [f64; 4] {
        self.position[2].derivatives(t)
    }

    pub fn emission_time(&self, tau: f64, c: f64) -> Result<f64> {
        bisect_increasing(|t| Ok(t + self.pz(t)[0] / c - tau), tau)
    }

    fn jets(&self, tau: f64, c: f64) -> Result<SourceJets> {
        let t = self.emission_time(tau, c)?;
        let px = self.position[0].derivatives(t);
        let py = self.position[1].derivatives(t);
        let pz = self.pz(t);
        let sr = self.strength[0].derivatives(t);
        let si = self.strength[1].derivatives(t);
        // Derivatives of t_k(τ).
        let t1 = 1.0 / (1.0 + pz[1] / c);
        let t2 = -t1 * t1 * t1 * pz[2] / c;
        let t3 = -(3.0 * t1 * t1 * t2 * pz[2] + t1 * t1 * t1 * t1 * pz[3]) / c;
        let compose = |f: [f64; 4]| [f[0], f[1] * t1, f[2] * t1 * t1 + f[1] * t2];
        let s = [C64::new(sr[0], si[0]), C64::new(sr[1], si[1]), C64::new(sr[2], si[2])];
        let zeta = Jet {
            v: s[0] * t1,
            d1: s[1] * t1 * t1 + s[0] * t2,
            d2: s[2] * t1 * t1 * t1 + s[1] * (3.0 * t1 * t2) + s[0] * t3,
        };
        let jx = Jet::real(compose(px));
        let jy = Jet::real(compose(py));
        let p = jx + jy * Jet { v: C64::new(0.0, 1.0), d1: C64::new(0.0, 0.0), d2: C64::new(0.0, 0.0) };
        let jz = Jet::real(compose(pz));
        Ok(SourceJets {
            zeta,
            p,
            pz: jz,
            truth: SliceTruth {
                t_emit: t,
                position: Vec3::new(px[0], py[0], pz[0]),
                strength: s[0],
                xi: t1,
                dz: pz[1] * t1,
            },
        })
    }

    pub fn truth(&self, tau: f64, c: f64) -> Result<SliceTruth> {
        Ok(self.jets(tau, c)?.truth)
    }
}

/// Exact reciprocity-gap moments of analytic sources at slice τ.
pub fn synthetic_slice(sources: &[AnalyticSource], kind: SourceKind, tau: f64, c: f64, n_max: usize) -> Result<RgfSlice> {
    let zero = C64::new(0.0, 0.0);
    let mut slice = RgfSlice {
        tau,
        rf: vec![zero; n_max + 1],
        rg: vec![zero; n_max + 1],
        rh: vec![zero; n_max + 1],
        ri: vec![zero; n_max + 1],
        rj: vec![zero; n_max + 1],
    };
    for src in sources {
        if src.kind != kind {
            return Err(Error::Invalid("mixed source kinds in a synthetic slice".into()));
        }
        let j = src.jets(tau, c)?;
        let pbar = j.p.conj();
        let zbar = j.zeta.conj();
        for n in 0..=n_max {
            let nf = n as f64;
            let pn = j.p.powu(n as u32);
            let (a, b, cc) = match kind {
                SourceKind::Point => {
                    let a = j.zeta * pn;
                    let b = if n >= 1 {
                        (j.zeta * j.pz * j.p.powu(n as u32 - 1)).scale(2.0 * nf)
                    } else {
                        Jet::constant(0.0)
                    };
                    let cc = (j.zeta * pbar * pn).scale(1.0 / c);
                    (a, b, cc)
                }
                SourceKind::Dipole => {
                    let a = if n >= 1 {
                        (j.zeta * j.p.powu(n as u32 - 1)).scale(nf)
                    } else {
                        Jet::constant(0.0)
                    };
                    let b = if n >= 2 {
                        (j.zeta * j.pz * j.p.powu(n as u32 - 2)).scale(2.0 * nf * (nf - 1.0))
                    } else {
                        Jet::constant(0.0)
                    };
                    let mut cc = (zbar * pn).scale(1.0 / c);
                    if n >= 1 {
                        cc = cc + (j.zeta * pbar * j.p.powu(n as u32 - 1)).scale(nf / c);
                    }
                    (a, b, cc)
                }
            };
            slice.rf[n] += a.v;
            slice.rg[n] += a.d1;
            slice.ri[n] += a.d2;
            if n >= 1 {
                slice.rh[n] += b.v + cc.d1;
                slice.rj[n] += b.d1 + cc.d2;
            }
        }
    }
    Ok(slice)
}

/// Σ_k strength·ξ·p^n (point) or n·strength·ξ·p^{n−1} (dipole) from a scripted
/// scenario, with ξ by a central difference of the bisection emission time.
pub fn scenario_moment_f(sources: &[SourceSpec], tau: f64, c: f64, n: usize) -> Result<C64> {
    let h = 1e-4;
    let mut sum = C64::new(0.0, 0.0);
    for src in sources {
        let t = emission_time(src, tau, c)?;
        let xi = (emission_time(src, tau + h, c)? - emission_time(src, tau - h, c)?) / (2.0 * h);
        let (p, s) = src.eval(t)?;
        let node = C64::new(p.x, p.y);
        let zeta = s.as_complex() * xi;
        sum += match src.kind() {
            SourceKind::Point => zeta * node.powu(n as u32),
            SourceKind::Dipole if n == 0 => C64::new(0.0, 0.0),
            SourceKind::Dipole => zeta * node.powu(n as u32 - 1) * n as f64,
        };
    }
    Ok(sum)
}

/// Seeded generator of random source configurations for property checks.
pub struct ConfigSampler {
    rng: ChaCha8Rng,
}

/// Rejection attempts before a sampler gives up.
const MAX_DRAWS: usize = 10_000;

impl ConfigSampler {
    pub fn new(seed: u64) -> Self {
        ConfigSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return lo;
        }
        Uniform::new(lo, hi).map_or(lo, |u| u.sample(&mut self.rng))
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.uniform(0.0, n as f64) as usize).min(n.saturating_sub(1))
    }

    fn sign(&mut self) -> f64 {
        if self.uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 }
    }

    /// `k` points in the disk of radius `radius`, pairwise at least `sep` apart.
    pub fn nodes(&mut self, k: usize, sep: f64, radius: f64) -> Result<Vec<C64>> {
        for _ in 0..MAX_DRAWS {
            let pts: Vec<C64> = (0..k)
                .map(|_| C64::from_polar(radius * libm::sqrt(self.uniform(0.0, 1.0)), self.uniform(0.0, 2.0 * core::f64::consts::PI)))
                .collect();
            if min_separation(&pts) >= sep {
                return Ok(pts);
            }
        }
        Err(Error::Invalid(alloc::format!("could not place {k} nodes {sep} apart")))
    }

    /// `k` complex weights with modulus in [lo, hi] and uniform phase.
    pub fn weights(&mut self, k: usize, lo: f64, hi: f64) -> Vec<C64> {
        (0..k).map(|_| C64::from_polar(self.uniform(lo, hi), self.uniform(0.0, 2.0 * core::f64::consts::PI))).collect()
    }

    fn harmonic(&mut self, offset: f64, amplitude: f64, omega: (f64, f64)) -> Harmonic {
        Harmonic {
            offset,
            amplitude: self.uniform(0.0, amplitude),
            omega: self.uniform(omega.0, omega.1),
            phase: self.uniform(0.0, 2.0 * core::f64::consts::PI),
        }
    }

    /// `k` smoothly moving sources whose planar positions at their emission
    /// times for slice `tau` are at least `sep` apart, with ξ in [0.6, 1.4]
    /// and strength modulus about 0.5 to 1.5.
    pub fn sources(&mut self, kind: SourceKind, k: usize, tau: f64, c: f64, sep: f64) -> Result<Vec<AnalyticSource>> {
        for _ in 0..MAX_DRAWS {
            let centres = self.nodes(k, sep, 1.0)?;
            let mut out = Vec::with_capacity(k);
            for p in &centres {
                let z0 = self.uniform(-0.6, 0.6);
                let position = [
                    self.harmonic(p.re, 0.05, (0.1, 0.5)),
                    self.harmonic(p.im, 0.05, (0.1, 0.5)),
                    self.harmonic(z0, 0.3, (0.1, 0.6)),
                ];
                let strength = match kind {
                    SourceKind::Point => {
                        let q = self.sign() * self.uniform(0.6, 1.3);
                        [self.harmonic(q, 0.2, (0.1, 1.0)), Harmonic::constant(0.0)]
                    }
                    SourceKind::Dipole => {
                        let m = C64::from_polar(self.uniform(0.6, 1.3), self.uniform(0.0, 2.0 * core::f64::consts::PI));
                        [self.harmonic(m.re, 0.1, (0.1, 1.0)), self.harmonic(m.im, 0.1, (0.1, 1.0))]
                    }
                };
                out.push(AnalyticSource { kind, position, strength });
            }
            let truths: Vec<SliceTruth> = out.iter().map(|s| s.truth(tau, c)).collect::<Result<_>>()?;
            let planar: Vec<C64> = truths.iter().map(|t| C64::new(t.position.x, t.position.y)).collect();
            let xi_ok = truths.iter().all(|t| (0.6..=1.4).contains(&libm::fabs(t.xi)));
            if xi_ok && min_separation(&planar) >= sep {
                return Ok(out);
            }
        }
        Err(Error::Invalid(alloc::format!("could not draw {k} separated sources")))
    }
}

/// Least pairwise distance (infinite for fewer than two points).
pub fn min_separation(pts: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}
