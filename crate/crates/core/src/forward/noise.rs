use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::BoundaryField;
use crate::{Error, Result};

fn weighted_norm(field: &BoundaryField, values: &[f64]) -> f64 {
    let w = field.grid().node_weights();
    libm::sqrt(values.iter().zip(w).map(|(v, w)| w * v * v).sum())
}

/// Adds Gaussian noise scaled per step so that ‖noise‖/‖φ‖ = `level` in the
/// quadrature-weighted L²(Γ) norm. Step ℓ draws from its own ChaCha stream,
/// so the result depends only on (seed, step, node).
pub fn add_noise(field: &BoundaryField, level: f64, seed: u64) -> Result<BoundaryField> {
    if !(level >= 0.0) {
        return Err(Error::Invalid(alloc::format!("noise level must be non-negative, got {level}")));
    }
    let mut out = field.clone();
    out.meta.noise_level = level;
    out.meta.seed = seed;
    if level == 0.0 {
        return Ok(out);
    }
    let n = field.grid().len();
    let mut e = alloc::vec![0.0; n];
    for l in 0..field.n_steps() {
        let phi = field.step(l);
        let norm_phi = weighted_norm(field, phi);
        if norm_phi == 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(l as u64);
        for v in e.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let scale = level * norm_phi / weighted_norm(field, &e);
        for (dst, (p, x)) in out.step_mut(l).iter_mut().zip(phi.iter().zip(&e)) {
            *dst = p + scale * x;
        }
    }
    Ok(out)
}

/// ‖noisy − clean‖/‖clean‖ at step ℓ (None when the clean step is zero).
pub fn relative_noise_ratio(clean: &BoundaryField, noisy: &BoundaryField, l: usize) -> Option<f64> {
    let a = clean.step(l);
    let b = noisy.step(l);
    let den = weighted_norm(clean, a);
    if den == 0.0 {
        return None;
    }
    let diff: alloc::vec::Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    Some(weighted_norm(clean, &diff) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphereGrid;

    fn sample_field() -> BoundaryField {
        let g = SphereGrid::new(2.0, 4, 8).unwrap();
        let n = g.len();
        let phi = (0..5 * n)
            .map(|i| if i < n { 0.0 } else { libm::sin(i as f64 * 0.37) * 0.1 })
            .collect();
        BoundaryField::from_samples(g, 0.1, 1.0, 5, phi).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let f = sample_field();
        let g = add_noise(&f, 0.0, 7).unwrap();
        assert_eq!(g.samples(), f.samples());
    }

    #[test]
    fn ratio_is_exact() {
        let f = sample_field();
        let g = add_noise(&f, 0.005, 7).unwrap();
        assert_eq!(g.step(0), f.step(0));
        for l in 1..5 {
            let r = relative_noise_ratio(&f, &g, l).unwrap();
            assert!((r - 0.005).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let f = sample_field();
        let a = add_noise(&f, 0.01, 3).unwrap();
        let b = add_noise(&f, 0.01, 3).unwrap();
        let c = add_noise(&f, 0.01, 4).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
        assert!(add_noise(&f, -0.1, 3).is_err());
    }
}
