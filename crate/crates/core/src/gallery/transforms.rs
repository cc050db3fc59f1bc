//! Signed discretizations of gallery items and the lattice and
//! extension-by-zero transforms acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::foundations::{unit_ball_volume, Domain};
use crate::gallery::GalleryItem;
use crate::rearrangement::{Cell, SampledField};

/// A cell carrying a signed value and the gradient magnitude on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedCell {
    pub weight: f64,
    pub value: f64,
    pub gradient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedField {
    domain: Domain,
    cells: Vec<SignedCell>,
}

impl SignedField {
    pub fn new(dom: Domain, cells: Vec<SignedCell>) -> Result<Self> {
        for (i, c) in cells.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return domain(format!("cell {i}: weight must be positive and finite"));
            }
            if !c.value.is_finite() || !(c.gradient.is_finite() && c.gradient >= 0.0) {
                return domain(format!("cell {i}: value and gradient must be finite, gradient >= 0"));
            }
        }
        Ok(SignedField { domain: dom, cells })
    }

    /// Radial discretization of `item`: a core ball of radius
    /// `R·core_ratio` and `shells` geometric shells, each sampled at the
    /// radius splitting its measure in half.
    pub fn from_item(item: &GalleryItem, shells: usize, core_ratio: f64) -> Result<Self> {
        if shells == 0 {
            return domain("need at least one shell");
        }
        if !(core_ratio > 0.0 && core_ratio < 1.0) {
            return domain(format!("core ratio must lie in (0,1), got {core_ratio}"));
        }
        let r = item.radius();
        let (nf, omega) = if item.is_slice() { (1.0, 1.0) } else { (item.dim() as f64, unit_ball_volume(item.dim())?) };
        let mid = |lo: f64, hi: f64| (0.5 * (lo.powf(nf) + hi.powf(nf))).powf(1.0 / nf);
        let cell = |lo: f64, hi: f64| {
            let s = mid(lo, hi);
            SignedCell {
                weight: omega * hi.powf(nf) * (-(nf * (lo / hi).ln()).exp_m1()),
                value: item.value_radial(s),
                gradient: item.radial_derivative(s).abs(),
                span: Some((lo, hi)),
            }
        };
        let core = r * core_ratio;
        let mut cells = Vec::with_capacity(shells + 1);
        cells.push(SignedCell { weight: omega * core.powf(nf), ..cell(0.0, core) });
        cells[0].span = Some((0.0, core));
        let ln_ratio = (1.0 / core_ratio).ln();
        let mut lo = core;
        for j in 1..=shells {
            let hi = if j == shells { r } else { core * (ln_ratio * j as f64 / shells as f64).exp() };
            cells.push(cell(lo, hi));
            lo = hi;
        }
        SignedField::new(item.domain(), cells)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells(&self) -> &[SignedCell] {
        &self.cells
    }

    /// `|u|` as a sampled field.
    pub fn magnitudes(&self) -> Result<SampledField> {
        self.project(|c| c.value.abs())
    }

    /// `|∇u|` as a sampled field.
    pub fn gradient_field(&self) -> Result<SampledField> {
        self.project(|c| c.gradient)
    }

    fn project(&self, g: impl Fn(&SignedCell) -> f64) -> Result<SampledField> {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell { weight: c.weight, magnitude: g(c), span: c.span })
            .collect();
        SampledField::new(self.domain.clone(), cells)
    }

    fn same_partition(&self, other: &SignedField) -> bool {
        self.domain == other.domain
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a.weight == b.weight && a.span == b.span)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LatticeOp {
    Max,
    Min,
    /// `u⁺ = max(u, 0)`.
    Pos,
    /// `u⁻ = min(u, 0)`, so that `|u| = u⁺ - u⁻`.
    Neg,
}

/// Cellwise lattice operation. The gradient on each cell is the gradient of
/// the active branch (zero where the constant 0 is active).
pub fn lattice(op: LatticeOp, a: &SignedField, b: Option<&SignedField>) -> Result<SignedField> {
    let cells = match op {
        LatticeOp::Max | LatticeOp::Min => {
            let b = match b {
                Some(b) => b,
                None => return domain("max/min need a second operand"),
            };
            if !a.same_partition(b) {
                return domain("lattice operands must share one domain and partition");
            }
            a.cells
                .iter()
                .zip(&b.cells)
                .map(|(x, y)| {
                    let take_x = if op == LatticeOp::Max { x.value >= y.value } else { x.value <= y.value };
                    if take_x {
                        *x
                    } else {
                        *y
                    }
                })
                .collect()
        }
        LatticeOp::Pos | LatticeOp::Neg => {
            if b.is_some() {
                return domain("positive and negative parts take one operand");
            }
            a.cells
                .iter()
                .map(|c| {
                    let keep = if op == LatticeOp::Pos { c.value > 0.0 } else { c.value < 0.0 };
                    if keep {
                        *c
                    } else {
                        SignedCell { value: 0.0, gradient: 0.0, ..*c }
                    }
                })
                .collect()
        }
    };
    SignedField::new(a.domain.clone(), cells)
}

/// Appends one zero cell covering `bigger ∖ f.domain`.
pub fn extend_by_zero(f: &SampledField, bigger: &Domain) -> Result<SampledField> {
    if !bigger.contains(f.domain()) {
        return domain("extension domain does not contain the field's domain");
    }
    let extra = bigger.measure() - f.domain().measure();
    let mut cells = f.cells().to_vec();
    if extra > bigger.measure() * 1e-15 {
        let span = match (f.domain(), bigger) {
            (Domain::Ball(a), Domain::Ball(b)) => Some((a.radius(), b.radius())),
            _ => None,
        };
        cells.push(Cell { weight: extra, magnitude: 0.0, span });
    }
    SampledField::new(bigger.clone(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundations::{BallDomain, ExponentPair, Interval1D};
    use crate::gallery::{make_shifted_up, make_v};
    use crate::norms::quasinorm;
    use crate::quadrature::QuadratureSpec;
    use crate::rearrangement::rearrange;

    #[test]
    fn positive_part_of_nonpositive_item_vanishes() {
        let u = SignedField::from_item(&make_shifted_up(2, 4.0, 1.0).unwrap(), 200, 1e-6).unwrap();
        let pos = lattice(LatticeOp::Pos, &u, None).unwrap();
        assert!(pos.cells().iter().all(|c| c.value == 0.0 && c.gradient == 0.0));
    }

    #[test]
    fn abs_is_pos_minus_neg_and_max_is_idempotent() {
        let u = SignedField::from_item(&make_shifted_up(3, 2.0, 1.0).unwrap(), 100, 1e-6).unwrap();
        let w = SignedField::from_item(&make_shifted_up(3, 4.0, 1.0).unwrap(), 100, 1e-6).unwrap();
        let pos = lattice(LatticeOp::Pos, &u, None).unwrap();
        let neg = lattice(LatticeOp::Neg, &u, None).unwrap();
        for ((c, p), n) in u.cells().iter().zip(pos.cells()).zip(neg.cells()) {
            assert_eq!(c.value.abs(), p.value - n.value);
        }
        assert_eq!(lattice(LatticeOp::Max, &u, Some(&u)).unwrap(), u);
        let mx = lattice(LatticeOp::Max, &u, Some(&w)).unwrap();
        let mn = lattice(LatticeOp::Min, &u, Some(&w)).unwrap();
        for (i, c) in mx.cells().iter().enumerate() {
            let bound = u.cells()[i].gradient.max(w.cells()[i].gradient);
            assert!(c.gradient <= bound && mn.cells()[i].gradient <= bound);
        }
    }

    #[test]
    fn lattice_rejects_mismatched_partitions() {
        let item = make_shifted_up(2, 4.0, 1.0).unwrap();
        let a = SignedField::from_item(&item, 10, 1e-3).unwrap();
        let b = SignedField::from_item(&item, 11, 1e-3).unwrap();
        assert!(lattice(LatticeOp::Max, &a, Some(&b)).is_err());
        assert!(lattice(LatticeOp::Min, &a, None).is_err());
    }

    #[test]
    fn extension_keeps_norms() {
        let v = make_v(1.0, 1.0, 2, 3.0).unwrap();
        let f = SignedField::from_item(&v, 500, 1e-8).unwrap().magnitudes().unwrap();
        let big: Domain = BallDomain::new(2, 2.0).unwrap().into();
        let g = extend_by_zero(&f, &big).unwrap();
        assert!(g.covers_domain());
        assert_eq!(rearrange(&f).unwrap(), rearrange(&g).unwrap());
        let quad = QuadratureSpec::default();
        for q in [1.0, 3.0, f64::INFINITY] {
            let pq = ExponentPair::new(3.0, q).unwrap();
            let a = quasinorm(&rearrange(&f).unwrap().into(), &pq, &quad).unwrap();
            let b = quasinorm(&rearrange(&g).unwrap().into(), &pq, &quad).unwrap();
            assert_eq!(a, b);
        }
        let small: Domain = Interval1D::new(0.0, 0.5).unwrap().into();
        assert!(extend_by_zero(&g, &small).is_err());
    }
}
