use super::{Axis, ConvDictionary, GradientOperator, LinearMap};

/// `K = (D; Φ₀; Φ₁)`, the synthesis operator stacked over both difference
/// operators. Flat range layout: `[D x (H·W), Φ₀ x (M·H·W), Φ₁ x (M·H·W)]`.
#[derive(Debug, Clone, Copy)]
pub struct AtvOperator<'a> {
    conv: &'a ConvDictionary,
    horizontal: GradientOperator,
    vertical: GradientOperator,
}

impl<'a> AtvOperator<'a> {
    pub fn new(conv: &'a ConvDictionary) -> Self {
        let (m, shape) = (conv.m_count(), conv.shape());
        Self {
            conv,
            horizontal: GradientOperator { axis: Axis::Horizontal, m_count: m, shape },
            vertical: GradientOperator { axis: Axis::Vertical, m_count: m, shape },
        }
    }
}

impl LinearMap for AtvOperator<'_> {
    fn domain_len(&self) -> usize {
        self.conv.domain_len()
    }
    fn range_len(&self) -> usize {
        self.conv.range_len() + 2 * self.conv.domain_len()
    }
    fn forward_flat(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.conv.forward_flat(x);
        out.extend(self.horizontal.forward_raw(x));
        out.extend(self.vertical.forward_raw(x));
        out
    }
    fn adjoint_flat(&self, y: &[f64]) -> Vec<f64> {
        let n = self.conv.range_len();
        let mn = self.conv.domain_len();
        assert_eq!(y.len(), n + 2 * mn);
        let mut out = self.conv.adjoint_flat(&y[..n]);
        let gh = self.horizontal.adjoint_raw(&y[n..n + mn]);
        let gv = self.vertical.adjoint_raw(&y[n + mn..]);
        for ((o, a), b) in out.iter_mut().zip(&gh).zip(&gv) {
            *o += a + b;
        }
        out
    }
}
