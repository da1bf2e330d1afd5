//! Named operators with declared profiles.

use crate::matrix::{ComplexMatrix, C64};
use crate::spectrum::{DeclaredSpectrum, Dim, IndexedRegion, Region, SpectrumDescription, SpectrumPoint};

use super::{IndexMap, PointSequence, PointTail, SeqRule, SpectralProfile, StructuredOperator};

pub fn identity() -> StructuredOperator {
    let one = C64::new(1.0, 0.0);
    let mut p = SpectralProfile::essential(1.0);
    p.alpha_in_point_spectrum = true;
    p.alpha_eigenspace_dim = Dim::Infinite;
    p.norm = Some(1.0);
    p.self_adjoint = true;
    let point = SpectrumDescription {
        discrete_points: vec![SpectrumPoint { value: one, multiplicity: Dim::Infinite }],
        regions: vec![],
    };
    p.spectrum = Some(DeclaredSpectrum { spectrum: point.clone(), essential: point, ..Default::default() });
    StructuredOperator::identity().with_profile(p)
}

/// Declared sets of an injective shift-like operator whose weights tend to `radius`
/// and whose cokernel has dimension `cokernel`.
pub fn shift_spectrum(radius: f64, cokernel: i64) -> DeclaredSpectrum {
    DeclaredSpectrum {
        spectrum: SpectrumDescription::region(Region::Disk { radius }),
        essential: SpectrumDescription::region(Region::Circle { radius }),
        index_regions: vec![IndexedRegion { region: Region::Disk { radius }, index: -cokernel }],
        discrete: vec![],
    }
}

/// `e_k -> e_{k+1}`.
pub fn unilateral_shift() -> StructuredOperator {
    let mut p = SpectralProfile::essential(1.0);
    p.alpha_in_point_spectrum = true;
    p.alpha_eigenspace_dim = Dim::Infinite;
    p.cokernel_dim = Dim::Finite(1);
    p.norm = Some(1.0);
    p.spectrum = Some(shift_spectrum(1.0, 1));
    StructuredOperator::weighted_shift(SeqRule::Const(1.0)).with_profile(p)
}

/// `sqrt(1 - 1/(2k))`, the weights of the worked hyponormal example.
pub fn example_weight_rule() -> SeqRule {
    SeqRule::sqrt(SeqRule::sub(SeqRule::Const(1.0), SeqRule::reciprocal(1.0, 2.0, 0.0)))
}

/// `K = diag(0, 1/2, 0, 1/4, 0, 1/6, ...)`.
pub fn example_k() -> StructuredOperator {
    StructuredOperator::diagonal(SeqRule::parity(SeqRule::Const(0.0), SeqRule::reciprocal(1.0, 1.0, 0.0)), 0.0)
}

/// `T(x_1, x_2, ...) = (sqrt(1/2) x_2, 0, x_1, 0, x_3, sqrt(3/4) x_4, x_5, sqrt(5/6) x_6, ...)`:
/// an isometric shift on the odd coordinates, a weighted shift on the even ones
/// and a single coupling `e_2 -> sqrt(1/2) e_1`.
pub fn hyponormal_example() -> StructuredOperator {
    let v1 = StructuredOperator::weighted_shift(SeqRule::Const(1.0));
    let a = StructuredOperator::finite(ComplexMatrix::from_real_rows(&[&[0.5f64.sqrt()]])).expect("1x1 block");
    // B e_k = sqrt(1 - 1/(2k)) e_{k+1} on H_2, with the first weight absorbed by A
    let b = StructuredOperator::weighted_shift(SeqRule::prefix(vec![0.0], example_weight_rule()));
    let op = StructuredOperator::block2x2(IndexMap::ODD, IndexMap::EVEN, [Some(v1), Some(a), None, Some(b)])
        .expect("odd and even coordinates partition N");
    let mut p = SpectralProfile::essential(1.0);
    p.lower_points = PointSequence { listed: vec![], tail: Some(PointTail { rule: example_weight_rule(), from: 1, multiplicity: 1 }) };
    p.alpha_in_point_spectrum = true;
    p.alpha_eigenspace_dim = Dim::Infinite;
    p.cokernel_dim = Dim::Finite(2);
    p.min_modulus = 0.5f64.sqrt();
    p.norm = Some(1.0);
    p.spectrum = Some(shift_spectrum(1.0, 2));
    op.with_profile(p)
}

/// `diag(1, 1/2, 1/3, ...)`, compact and positive.
pub fn reciprocal_diagonal() -> StructuredOperator {
    let mut p = SpectralProfile::essential(0.0);
    p.upper_points = PointSequence {
        listed: vec![],
        tail: Some(PointTail { rule: SeqRule::reciprocal(1.0, 1.0, 0.0), from: 1, multiplicity: 1 }),
    };
    p.min_modulus = 0.0;
    p.norm = Some(1.0);
    p.self_adjoint = true;
    StructuredOperator::diagonal(SeqRule::reciprocal(1.0, 1.0, 0.0), 0.0).with_profile(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::render;

    #[test]
    fn profiles_validate() {
        for op in [identity(), unilateral_shift(), hyponormal_example(), reciprocal_diagonal()] {
            op.profile().unwrap().validate().unwrap();
        }
    }

    #[test]
    fn example_k_entries() {
        let k = render(&example_k(), 6).unwrap();
        assert_eq!(k, ComplexMatrix::from_real_diag(&[0.0, 0.5, 0.0, 0.25, 0.0, 1.0 / 6.0]));
    }

    #[test]
    fn shift_weyl_is_disk() {
        let s = unilateral_shift();
        let d = s.profile().unwrap().spectrum.as_ref().unwrap();
        assert!(d.weyl().same_set(&SpectrumDescription::region(Region::Disk { radius: 1.0 })));
    }
}
