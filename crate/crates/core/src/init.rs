//! Initialization schemes for deep linear stacks.
//!
//! The schemes differ in which invariants they buy at time zero:
//!
//! * [`balanced_init`] factors a given end-to-end matrix through the
//!   network so the stack is exactly 0-balanced and the product is the
//!   requested matrix. Combined with a positive deficiency margin this
//!   is the initialization the convergence certificates speak about.
//! * [`balanced_init_gaussian`] draws the end-to-end matrix with i.i.d.
//!   Gaussian entries and then balances it, matching the random-init
//!   certificate for scalar-output networks.
//! * [`gaussian_layerwise`] draws every layer independently — the
//!   conventional baseline, approximately balanced only by concentration
//!   of measure.
//! * [`identity_residual`] sets every (square) layer to the identity,
//!   which is 0-balanced with end-to-end product equal to the identity.

use alloc::format;
use alloc::vec::Vec;

use crate::decomp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{NetSpec, WeightStack};
use crate::rng::Rng;

/// Factors `a` into a perfectly balanced stack whose end-to-end product
/// is `a`.
///
/// With the thin SVD `a = U diag(s) V^T` and `k = min(d_0, d_N)`, the
/// layers are the zero-padded embeddings of
/// `diag(s)^(1/N) V^T`, `diag(s)^(1/N)` (middle layers), and
/// `U diag(s)^(1/N)`. Every hidden dimension must be at least `k` for
/// the cores to fit; narrower networks cannot represent `a` in balanced
/// form and are rejected.
pub fn balanced_init(spec: &NetSpec, a: &Matrix) -> Result<WeightStack> {
    if a.shape() != (spec.d_out(), spec.d_in()) {
        return Err(Error::contract(format!(
            "balanced init: target is {}x{} but the network maps {} -> {}",
            a.rows(),
            a.cols(),
            spec.d_in(),
            spec.d_out()
        )));
    }
    let n = spec.depth();
    if n == 1 {
        return WeightStack::new(spec.clone(), alloc::vec![a.clone()]);
    }
    let k = spec.d_in().min(spec.d_out());
    for j in 1..n {
        let hidden = spec.dims()[j];
        if hidden < k {
            return Err(Error::contract(format!(
                "balanced init: hidden dimension {hidden} (layer {j}) is below min(d_0, d_N) = {k}"
            )));
        }
    }

    let svd = decomp::svd_thin(a)?;
    let root: Vec<f64> = svd.s.iter().map(|&s| libm::pow(s, 1.0 / n as f64)).collect();
    let root_diag = Matrix::from_diag(&root);

    let mut layers = Vec::with_capacity(n);
    for j in 1..=n {
        let core = if j == 1 {
            root_diag.matmul(&svd.v.transpose())
        } else if j == n {
            svd.u.matmul(&root_diag)
        } else {
            root_diag.clone()
        };
        let (rows, cols) = spec.layer_shape(j);
        layers.push(Matrix::embed_top_left(&core, rows, cols));
    }
    WeightStack::new(spec.clone(), layers)
}

/// Balanced initialization from a Gaussian end-to-end draw: samples a
/// `d_N x d_0` matrix with i.i.d. `N(0, std^2)` entries and factors it
/// with [`balanced_init`].
pub fn balanced_init_gaussian(spec: &NetSpec, std: f64, rng: &mut Rng) -> Result<WeightStack> {
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::contract(format!(
            "balanced init: standard deviation must be finite and nonnegative, got {std}"
        )));
    }
    let a = Matrix::from_fn(spec.d_out(), spec.d_in(), |_, _| std * rng.next_normal());
    balanced_init(spec, &a)
}

/// Conventional layer-wise initialization: every entry of every layer is
/// an independent `N(0, std^2)` draw.
pub fn gaussian_layerwise(spec: &NetSpec, std: f64, rng: &mut Rng) -> Result<WeightStack> {
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::contract(format!(
            "layerwise init: standard deviation must be finite and nonnegative, got {std}"
        )));
    }
    let layers: Vec<Matrix> = (1..=spec.depth())
        .map(|j| {
            let (rows, cols) = spec.layer_shape(j);
            Matrix::from_fn(rows, cols, |_, _| std * rng.next_normal())
        })
        .collect();
    WeightStack::new(spec.clone(), layers)
}

/// Sets every layer to the identity. Requires all dimensions equal; the
/// result is 0-balanced with end-to-end product equal to the identity.
pub fn identity_residual(spec: &NetSpec) -> Result<WeightStack> {
    let d = spec.d_in();
    if spec.dims().iter().any(|&dim| dim != d) {
        return Err(Error::contract(
            "identity initialization requires all layer dimensions equal",
        ));
    }
    let layers: Vec<Matrix> = (0..spec.depth()).map(|_| Matrix::identity(d)).collect();
    WeightStack::new(spec.clone(), layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::balancedness_delta;
    use alloc::vec;
    use alloc::vec::Vec;

    fn random_spec_and_target(rng: &mut Rng) -> (NetSpec, Matrix) {
        let n = 1 + (rng.next_u64() % 4) as usize;
        let d0 = 1 + (rng.next_u64() % 5) as usize;
        let dn = 1 + (rng.next_u64() % 5) as usize;
        let k = d0.min(dn);
        let mut dims = vec![d0];
        for _ in 1..n {
            dims.push(k + (rng.next_u64() % 3) as usize);
        }
        dims.push(dn);
        let spec = NetSpec::new(dims).unwrap();
        let a = Matrix::from_fn(dn, d0, |_, _| rng.next_normal());
        (spec, a)
    }

    #[test]
    fn balanced_init_reproduces_the_target_and_is_balanced() {
        let mut rng = Rng::from_seed(7);
        for trial in 0..50 {
            let (spec, a) = random_spec_and_target(&mut rng);
            let w = balanced_init(&spec, &a).unwrap();
            let scale = a.frob_norm().max(1.0);
            assert!(
                w.end_to_end().frob_dist(&a) <= 1e-10 * scale,
                "trial {trial}: product deviates from target"
            );
            assert!(
                balancedness_delta(&w) <= 1e-10 * scale * scale,
                "trial {trial}: stack is not balanced"
            );
        }
    }

    #[test]
    fn balanced_init_layers_carry_root_singular_values() {
        let a = Matrix::new(2, 2, vec![3.0, 0.0, 0.0, 0.75]).unwrap();
        let spec = NetSpec::new(vec![2, 3, 2]).unwrap();
        let w = balanced_init(&spec, &a).unwrap();
        for j in 1..=2 {
            let s = decomp::singular_values(w.layer(j)).unwrap();
            assert!((s[0] - libm::sqrt(3.0)).abs() < 1e-12, "layer {j}: {:?}", s);
            assert!((s[1] - libm::sqrt(0.75)).abs() < 1e-12);
            // The padded third direction contributes a zero singular value
            // on the 3-dimensional side only.
        }
    }

    #[test]
    fn balanced_init_of_zero_target_is_the_zero_stack() {
        let spec = NetSpec::new(vec![3, 3, 2]).unwrap();
        let w = balanced_init(&spec, &Matrix::zeros(2, 3)).unwrap();
        for j in 1..=2 {
            assert_eq!(w.layer(j).frob_norm(), 0.0, "layer {j} should be zero");
        }
    }

    #[test]
    fn balanced_init_rejects_narrow_hidden_layers() {
        let spec = NetSpec::new(vec![3, 1, 3]).unwrap();
        let err = balanced_init(&spec, &Matrix::identity(3)).unwrap_err();
        assert!(err.is_contract());
    }

    #[test]
    fn balanced_init_rejects_shape_mismatch() {
        let spec = NetSpec::new(vec![3, 3, 2]).unwrap();
        let err = balanced_init(&spec, &Matrix::identity(3)).unwrap_err();
        assert!(err.is_contract());
    }

    #[test]
    fn gaussian_inits_are_deterministic_per_seed() {
        let spec = NetSpec::new(vec![4, 3, 2]).unwrap();
        let draw = |seed: u64| {
            let mut rng = Rng::from_seed(seed);
            gaussian_layerwise(&spec, 0.1, &mut rng).unwrap()
        };
        let (a, b, c) = (draw(5), draw(5), draw(6));
        for j in 1..=2 {
            assert_eq!(a.layer(j).entries(), b.layer(j).entries(), "same seed must agree");
        }
        assert_ne!(
            a.layer(1).entries(),
            c.layer(1).entries(),
            "different seeds must differ"
        );

        let mut r1 = Rng::from_seed(11);
        let mut r2 = Rng::from_seed(11);
        let g1 = balanced_init_gaussian(&spec, 0.1, &mut r1).unwrap();
        let g2 = balanced_init_gaussian(&spec, 0.1, &mut r2).unwrap();
        for j in 1..=2 {
            assert_eq!(g1.layer(j).entries(), g2.layer(j).entries());
        }
    }

    #[test]
    fn layerwise_std_controls_entry_scale() {
        let spec = NetSpec::new(vec![30, 30, 30]).unwrap();
        let mut rng = Rng::from_seed(123);
        let w = gaussian_layerwise(&spec, 0.05, &mut rng).unwrap();
        let entries: Vec<f64> = w.layers().iter().flat_map(|l| l.entries().iter().copied()).collect();
        let var = entries.iter().map(|e| e * e).sum::<f64>() / entries.len() as f64;
        assert!((var - 0.0025).abs() < 0.0005, "sample variance {var}");
    }

    #[test]
    fn identity_residual_is_the_identity_map() {
        let spec = NetSpec::uniform(4, 3).unwrap();
        let w = identity_residual(&spec).unwrap();
        assert!(w.end_to_end().frob_dist(&Matrix::identity(3)) < 1e-15);
        assert_eq!(balancedness_delta(&w), 0.0);

        let ragged = NetSpec::new(vec![3, 4, 3]).unwrap();
        assert!(identity_residual(&ragged).unwrap_err().is_contract());
    }
}
