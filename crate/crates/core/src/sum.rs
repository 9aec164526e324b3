//! Neumaier compensated summation, real and complex.

use crate::linalg::{c64, C64};

#[derive(Debug, Clone, Copy, Default)]
pub struct RealSum {
    sum: f64,
    comp: f64,
}

impl RealSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: RealSum,
    im: RealSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        c64(self.re.value(), self.im.value())
    }
}

impl FromIterator<C64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        let mut s = ComplexSum::default();
        for z in iter {
            s.add(z);
        }
        s
    }
}

impl FromIterator<f64> for RealSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RealSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn csum<I: IntoIterator<Item = C64>>(iter: I) -> C64 {
    iter.into_iter().collect::<ComplexSum>().value()
}

pub fn rsum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<RealSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((rsum(xs) - 4e-16).abs() < 1e-30);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 4e-16);
    }
}
