use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Discrete Fourier transform of a power-of-two length vector.
///
/// The forward transform is unnormalized; the inverse applies `1/N`.
pub fn fft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(Error::Size(n));
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = x.to_vec();
    plan.process(&mut buf);
    if inverse {
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
    Ok(buf)
}
