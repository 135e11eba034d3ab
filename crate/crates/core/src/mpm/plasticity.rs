//! Hencky elasticity and the von Mises return mapping, both in the
//! principal frame of F = U diag(sigma) V^T.

use super::{MaterialParams, SimError};
use crate::math::{svd3, Mat3, Real, Svd3, Vec3};

/// Limits on the singular values of F; squeezing to near-zero thickness is
/// an intended use case and must not produce a degenerate gradient.
pub const SIGMA_CLAMP: (Real, Real) = (0.05, 20.0);

/// Hencky (logarithmic) principal strains of clamped singular values.
#[inline]
fn hencky(sigma: &Vec3) -> Vec3 {
    Vec3::new(sigma.x.ln(), sigma.y.ln(), sigma.z.ln())
}

/// Kirchhoff stress tau = U (2 mu eps + lambda tr(eps) I) U^T for the
/// Hencky-strain model.
pub fn kirchhoff_stress(svd: &Svd3, mat: &MaterialParams) -> Mat3 {
    let eps = hencky(&svd.sigma);
    let trace = eps.x + eps.y + eps.z;
    let (mu, lambda) = (mat.mu(), mat.lambda());
    let principal = eps * (2.0 * mu) + Vec3::repeat(lambda * trace);
    svd.u * Mat3::from_diagonal(&principal) * svd.u.transpose()
}

/// Von Mises return mapping on principal Hencky strains. Returns the
/// projected strains; identity when inside the yield surface.
#[inline]
fn project_strains(eps: &Vec3, mat: &MaterialParams) -> Vec3 {
    let mean = (eps.x + eps.y + eps.z) / 3.0;
    let dev = eps - Vec3::repeat(mean);
    let dev_norm = dev.norm();
    let mu2 = 2.0 * mat.mu();
    if mu2 * dev_norm <= mat.yield_stress || dev_norm < 1e-30 {
        *eps
    } else {
        eps - dev * ((dev_norm - mat.yield_stress / mu2) / dev_norm)
    }
}

/// Clamps singular values, applies the return mapping, and reports both the
/// new deformation gradient and its Kirchhoff stress (one SVD, shared by the
/// g2p kernel and the next p2g scatter).
pub fn plastic_return(svd: &Svd3, mat: &MaterialParams) -> (Mat3, Mat3) {
    let sigma = Vec3::new(
        svd.sigma.x.clamp(SIGMA_CLAMP.0, SIGMA_CLAMP.1),
        svd.sigma.y.clamp(SIGMA_CLAMP.0, SIGMA_CLAMP.1),
        svd.sigma.z.clamp(SIGMA_CLAMP.0, SIGMA_CLAMP.1),
    );
    let eps = project_strains(&hencky(&sigma), mat);
    let sigma_new = Vec3::new(eps.x.exp(), eps.y.exp(), eps.z.exp());
    let f = svd.u * Mat3::from_diagonal(&sigma_new) * svd.v.transpose();
    let trace = eps.x + eps.y + eps.z;
    let principal = eps * (2.0 * mat.mu()) + Vec3::repeat(mat.lambda() * trace);
    let tau = svd.u * Mat3::from_diagonal(&principal) * svd.u.transpose();
    (f, tau)
}

/// Spec'd scalar entry point: F -> projected F.
pub fn apply_plasticity(f: &Mat3, mat: &MaterialParams) -> Result<Mat3, SimError> {
    if f.iter().any(|x| !x.is_finite()) {
        return Err(SimError::NonFinite { particle: 0 });
    }
    let (f_new, _) = plastic_return(&svd3(f), mat);
    Ok(f_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn dev_norm(f: &Mat3) -> Real {
        let svd = svd3(f);
        let eps = hencky(&svd.sigma);
        let mean = (eps.x + eps.y + eps.z) / 3.0;
        (eps - Vec3::repeat(mean)).norm()
    }

    #[test]
    fn identity_stays_identity() {
        let mat = MaterialParams::default();
        let out = apply_plasticity(&Mat3::identity(), &mat).unwrap();
        assert!((out - Mat3::identity()).norm() < 1e-12);
    }

    #[test]
    fn pure_volumetric_is_unchanged() {
        let mat = MaterialParams::default();
        for c in [0.3, 0.9, 1.0, 1.7] {
            let f = Mat3::identity() * c;
            let out = apply_plasticity(&f, &mat).unwrap();
            assert!((out - f).norm() < 1e-10, "c = {c}");
        }
    }

    #[test]
    fn strong_shear_lands_on_yield_surface_preserving_volume() {
        let mat = MaterialParams::default();
        let mut f = Mat3::identity();
        f[(0, 1)] = 0.8; // far beyond yield for the default material
        let det_in = f.determinant();
        let out = apply_plasticity(&f, &mat).unwrap();
        let resid = 2.0 * mat.mu() * dev_norm(&out) - mat.yield_stress;
        assert!(resid.abs() <= 1e-9 * mat.yield_stress, "residual {resid}");
        assert!((out.determinant() - det_in).abs() <= 1e-9 * det_in);
    }

    #[test]
    fn projection_is_inside_surface_and_idempotent() {
        let mat = MaterialParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..300 {
            let mut f = Mat3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
            f += Mat3::identity();
            if f.determinant().abs() < 1e-3 {
                continue;
            }
            if f.determinant() < 0.0 {
                f.column_mut(0).neg_mut();
            }
            let once = apply_plasticity(&f, &mat).unwrap();
            assert!(
                2.0 * mat.mu() * dev_norm(&once)
                    <= mat.yield_stress + 1e-9 * mat.yield_stress
            );
            let twice = apply_plasticity(&once, &mat).unwrap();
            assert!((twice - once).norm() < 1e-10);
        }
    }

    #[test]
    fn non_finite_input_is_an_error() {
        let mat = MaterialParams::default();
        let mut f = Mat3::identity();
        f[(1, 1)] = Real::NAN;
        assert!(apply_plasticity(&f, &mat).is_err());
    }

    #[test]
    fn stress_is_zero_at_identity_and_tensile_under_stretch() {
        let mat = MaterialParams::default();
        assert!(kirchhoff_stress(&svd3(&Mat3::identity()), &mat).norm() < 1e-12);
        let f = Mat3::from_diagonal(&Vec3::new(1.05, 1.0, 1.0));
        let tau = kirchhoff_stress(&svd3(&f), &mat);
        assert!(tau[(0, 0)] > 0.0);
        // Off-diagonals vanish for a diagonal stretch.
        assert!(tau[(0, 1)].abs() < 1e-10 && tau[(1, 2)].abs() < 1e-10);
    }
}
