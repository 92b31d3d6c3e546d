use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Full linear convolution of two sampled signals on the same bin width,
/// computed as a zero-padded frequency-domain product. The output has
/// `a.len() + b.len() - 1` samples.
pub fn convolve_time(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("cannot convolve an empty signal".into()));
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    fb[..b.len()].copy_from_slice(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);

    let scale = 1.0 / n as f64;
    fa.truncate(out_len);
    for x in &mut fa {
        *x *= scale;
    }
    Ok(fa)
}

/// Real-valued convenience wrapper around [`convolve_time`].
pub fn convolve_time_real(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let ca: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let cb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(convolve_time(&ca, &cb)?.into_iter().map(|z| z.re).collect())
}
