use crate::linalg::{c, identity, CMatrix};
use crate::quantum_objects::trace_of_product;

/// Orthonormal Hermitian operator basis: `I/√d` followed by the generalized
/// Gell-Mann matrices, each scaled to unit Hilbert–Schmidt norm.
#[derive(Clone, Debug)]
pub struct HermitianBasis {
    d: usize,
    operators: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn gell_mann(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut operators = Vec::with_capacity(d * d);
        operators.push(identity(d).unscale((d as f64).sqrt()));
        for j in 0..d {
            for k in j + 1..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = c(s, 0.0);
                sym[(k, j)] = c(s, 0.0);
                operators.push(sym);
                let mut anti = CMatrix::zeros(d, d);
                anti[(j, k)] = c(0.0, -s);
                anti[(k, j)] = c(0.0, s);
                operators.push(anti);
            }
        }
        for l in 1..d {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut diag = CMatrix::zeros(d, d);
            for m in 0..l {
                diag[(m, m)] = c(1.0 / norm, 0.0);
            }
            diag[(l, l)] = c(-(l as f64) / norm, 0.0);
            operators.push(diag);
        }
        HermitianBasis { d, operators }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `φ_k = Tr(B_k m)`; real for Hermitian `m`.
    pub fn coefficients(&self, m: &CMatrix) -> Vec<f64> {
        self.operators
            .iter()
            .map(|b| trace_of_product(b, m).re)
            .collect()
    }

    /// `Σ_k φ_k B_k`
    pub fn compose(&self, phi: &[f64]) -> CMatrix {
        assert_eq!(phi.len(), self.len(), "coefficient count");
        self.operators
            .iter()
            .zip(phi)
            .fold(CMatrix::zeros(self.d, self.d), |acc, (b, &x)| {
                acc + b.scale(x)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_asymmetry;
    use crate::quantum_objects::random_density_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn orthonormal_and_hermitian() {
        for d in [1, 2, 3, 4, 8] {
            let basis = HermitianBasis::gell_mann(d);
            assert_eq!(basis.len(), d * d);
            for (i, a) in basis.operators().iter().enumerate() {
                assert!(hermitian_asymmetry(a) < 1e-15);
                for (j, b) in basis.operators().iter().enumerate() {
                    let g = trace_of_product(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((g.re - expected).abs() < 1e-10 && g.im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn coefficients_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let rho = random_density_matrix(4, 3, &mut rng);
        let basis = HermitianBasis::gell_mann(4);
        let phi = basis.coefficients(rho.mat());
        assert!((phi[0] - 0.5).abs() < 1e-12);
        assert!((basis.compose(&phi) - rho.mat()).norm() < 1e-12);
    }
}
