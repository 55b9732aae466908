use super::{FeedForward, Kind};
use crate::nn::{dot, Activation, DenseLayer, LayerCache};
use crate::{Error, Result};

/// One convex side of a DC split: `c . z_K(x) + l . x + offset` with `c >= 0`,
/// where `z_K` is the last hidden layer of `trunk`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPiece<'a> {
    pub trunk: &'a [DenseLayer],
    pub weights: Vec<f64>,
    pub linear: Vec<f64>,
    pub offset: f64,
}

impl<'a> ConvexPiece<'a> {
    pub fn zero(trunk: &'a [DenseLayer], input_dim: usize) -> Self {
        let width = trunk.last().map_or(0, DenseLayer::out_dim);
        ConvexPiece {
            trunk,
            weights: vec![0.0; width],
            linear: vec![0.0; input_dim],
            offset: 0.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.linear.len()
    }

    /// True when the trunk does not contribute (all output weights zero).
    pub fn trunk_unused(&self) -> bool {
        self.weights.iter().all(|&c| c == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.trunk_unused() && self.linear.iter().all(|&l| l == 0.0) && self.offset == 0.0
    }

    fn trunk_caches(&self, x: &[f64]) -> Vec<LayerCache> {
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.trunk.len());
        for layer in self.trunk {
            let z_prev = caches.last().map_or(x, |c| c.out.as_slice());
            let c = layer.forward_cached(z_prev, x);
            caches.push(c);
        }
        caches
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let affine = dot(&self.linear, x) + self.offset;
        if self.trunk_unused() {
            return affine;
        }
        let caches = self.trunk_caches(x);
        dot(&self.weights, &caches.last().expect("non-empty trunk").out) + affine
    }

    /// Value and a subgradient with respect to `x` (right-branch convention
    /// at kinks, which yields a valid subgradient for nonnegative weights).
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = self.linear.clone();
        let affine = dot(&self.linear, x) + self.offset;
        if self.trunk_unused() {
            return (affine, grad);
        }
        let caches = self.trunk_caches(x);
        let value = dot(&self.weights, &caches.last().expect("non-empty trunk").out) + affine;
        let mut d_out = self.weights.clone();
        for (k, layer) in self.trunk.iter().enumerate().rev() {
            let mut d_prev = vec![0.0; layer.in_dim()];
            layer.backward_input(&caches[k], &d_out, &mut d_prev, &mut grad);
            if k == 0 {
                for (g, d) in grad.iter_mut().zip(&d_prev) {
                    *g += d;
                }
            }
            d_out = d_prev;
        }
        (value, grad)
    }
}

/// `f(x) = f1(x) - f2(x)` with both pieces convex.
#[derive(Debug, Clone, PartialEq)]
pub struct DcSplit<'a> {
    pub f1: ConvexPiece<'a>,
    pub f2: ConvexPiece<'a>,
}

impl<'a> DcSplit<'a> {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.f1.eval(x) - self.f2.eval(x)
    }

    /// Split of `-f`.
    pub fn negated(self) -> Self {
        DcSplit {
            f1: self.f2,
            f2: self.f1,
        }
    }
}

fn check_trunk(trunk: &[DenseLayer], kind: Kind) -> Result<()> {
    for (k, layer) in trunk.iter().enumerate() {
        if k > 0 && !layer.nonneg {
            return Err(Error::Unsupported(format!(
                "{} network with {} hidden layers has no DC split (layer {k} is unconstrained)",
                kind.name(),
                trunk.len()
            )));
        }
        if layer.activation == Activation::PcRelu
            && layer.slope.iter().any(|a| !(0.0..=1.0).contains(a))
        {
            return Err(Error::Contract("PC-ReLU slope outside [0, 1]".into()));
        }
    }
    Ok(())
}

/// Split a feed-forward network into two convex pieces.
///
/// CDiNN-1 and single-hidden-layer standard nets split the output weights by
/// sign over the shared trunk; CDiNN-2 uses one trunk per piece; an ICNN is
/// one piece against the zero function. Affine output terms (bias and
/// output pass-through) are folded into `f1`.
pub fn dc_split(net: &FeedForward) -> Result<DcSplit<'_>> {
    let d = net.input_dim();
    let kind = net.spec.kind;
    let mut sides: [Option<(&[DenseLayer], Vec<f64>)>; 2] = [None, None];
    let mut linear = vec![0.0; d];
    let mut offset = 0.0;

    for (branch, &sign) in net.branches.iter().zip(&net.signs) {
        let trunk = branch.trunk();
        check_trunk(trunk, kind)?;
        let out = branch.output_layer();
        let c = out.effective_weight().data().to_vec();
        if let Some(p) = &out.passthrough {
            for (l, &v) in linear.iter_mut().zip(p.row(0)) {
                *l += sign * v;
            }
        }
        if out.bias_enabled {
            offset += sign * out.bias[0];
        }
        let (pos, neg): (Vec<f64>, Vec<f64>) = if out.nonneg {
            if sign > 0.0 {
                (c, vec![0.0; trunk.last().map_or(0, DenseLayer::out_dim)])
            } else {
                (vec![0.0; trunk.last().map_or(0, DenseLayer::out_dim)], c)
            }
        } else {
            let p: Vec<f64> = c.iter().map(|&w| (sign * w).max(0.0)).collect();
            let n: Vec<f64> = c.iter().map(|&w| (-sign * w).max(0.0)).collect();
            (p, n)
        };
        for (side, weights) in [(0usize, pos), (1usize, neg)] {
            if weights.iter().all(|&v| v == 0.0) {
                continue;
            }
            match &mut sides[side] {
                None => sides[side] = Some((trunk, weights)),
                Some((t, w)) if std::ptr::eq(*t, trunk) => {
                    for (a, b) in w.iter_mut().zip(&weights) {
                        *a += b;
                    }
                }
                Some(_) => {
                    return Err(Error::Unsupported(
                        "each side of the split may use only one trunk".into(),
                    ))
                }
            }
        }
    }

    let fallback = net.branches[0].trunk();
    let [s1, s2] = sides.map(|side| match side {
        Some((trunk, weights)) => ConvexPiece {
            trunk,
            weights,
            linear: vec![0.0; d],
            offset: 0.0,
        },
        None => ConvexPiece::zero(fallback, d),
    });
    let (mut f1, f2) = (s1, s2);
    f1.linear = linear;
    f1.offset = offset;
    Ok(DcSplit { f1, f2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{build, Network, NetworkSpec};
    use crate::nn::Matrix;

    fn ff(spec: NetworkSpec) -> FeedForward {
        match build(&spec).unwrap() {
            Network::FeedForward(n) => n,
            _ => unreachable!(),
        }
    }

    #[test]
    fn cdinn1_sign_split() {
        let mut net = ff(NetworkSpec::new(Kind::Cdinn1, 1, vec![3]));
        net.branches[0].layers[1].weight = Matrix::from_rows(&[vec![2.0, -3.0, 0.0]]).unwrap();
        let split = dc_split(&net).unwrap();
        assert_eq!(split.f1.weights, vec![2.0, 0.0, 0.0]);
        assert_eq!(split.f2.weights, vec![0.0, 3.0, 0.0]);
        assert!(std::ptr::eq(split.f1.trunk, split.f2.trunk));
    }

    #[test]
    fn icnn_second_piece_is_zero() {
        let net = ff(NetworkSpec::new(Kind::Icnn, 2, vec![4, 4]));
        let split = dc_split(&net).unwrap();
        assert!(split.f2.is_zero());
        for x in [[0.1, 0.2], [-0.9, 0.4]] {
            assert_eq!(split.f2.eval(&x), 0.0);
            assert_eq!(split.eval(&x), net.forward(&x).unwrap());
        }
    }

    #[test]
    fn negated_icnn_is_pure_concave() {
        let net = ff(NetworkSpec::new(Kind::Icnn, 2, vec![4]).negated());
        let split = dc_split(&net).unwrap();
        assert!(split.f1.trunk_unused());
        assert!(!split.f2.trunk_unused());
        let x = [0.3, -0.2];
        assert!((split.eval(&x) - net.forward(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn deep_standard_network_has_no_split() {
        let net = ff(NetworkSpec::new(Kind::Standard, 2, vec![4, 4]));
        assert!(matches!(dc_split(&net), Err(Error::Unsupported(_))));
        let shallow = ff(NetworkSpec::new(Kind::Standard, 2, vec![4]));
        assert!(dc_split(&shallow).is_ok());
    }

    #[test]
    fn dc_identity_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for kind in [Kind::Cdinn1, Kind::Cdinn2, Kind::Icnn, Kind::Standard] {
            let hidden = if kind == Kind::Standard { vec![6] } else { vec![6, 5] };
            let spec = NetworkSpec::new(kind, 3, hidden).with_seed(11);
            let net = ff(spec);
            let split = dc_split(&net).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y = net.forward(&x).unwrap();
                assert!((y - split.eval(&x)).abs() < 1e-12, "{kind:?}");
            }
        }
    }
}
