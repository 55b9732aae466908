/// A store of trainable parameters, visited as a fixed sequence of slices.
///
/// Gradients are held in a value of the same type (see [`Params::zeros_like`]),
/// so gradient shapes mirror parameter shapes by construction.
pub trait Params: Clone {
    fn visit(&self, f: &mut dyn FnMut(&[f64]));

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    /// Restore invariants after an unconstrained update (slope clamping etc.).
    fn project(&mut self) {}

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.visit_mut(&mut |s| s.fill(0.0));
        z
    }

    fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.visit(&mut |s| out.extend_from_slice(s));
        out
    }

    /// Inverse of [`Params::flatten`]. Panics on a length mismatch.
    fn assign_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&flat[pos..pos + s.len()]);
            pos += s.len();
        });
        assert_eq!(pos, flat.len(), "flat parameter length mismatch");
    }

    fn all_finite(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |s| ok &= s.iter().all(|v| v.is_finite()));
        ok
    }
}

/// Gradient of a scalar output with respect to every raw parameter and the input.
#[derive(Debug, Clone, PartialEq)]
pub struct GradStore<P> {
    pub params: P,
    pub input: Vec<f64>,
}
