//! Compensated summation for complex terms of widely varying magnitude.

use num_complex::Complex64;

/// Running Neumaier (improved Kahan-Babuska) sum over complex numbers.
///
/// Real and imaginary parts are compensated independently.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    re: f64,
    re_comp: f64,
    im: f64,
    im_comp: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    /// Creates an empty sum.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_comp, z.re);
        neumaier(&mut self.im, &mut self.im_comp, z.im);
    }

    /// Returns the compensated total.
    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re + self.re_comp, self.im + self.im_comp)
    }
}

/// Sums terms in ascending order of magnitude with compensation.
///
/// The ordering makes the result independent of the order in which terms were produced.
pub fn sorted_sum(mut terms: Vec<Complex64>) -> Complex64 {
    terms.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.total()
}
