//! Small n-dimensional FFT layer over `rustfft`, with per-thread plan reuse.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// In-place unnormalized DFT along every axis of a row-major array with the
/// given dims.  Forward uses the `e^{-i...}` kernel, inverse `e^{+i...}`.
pub fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total, "data length must match dims");
    let mut line: Vec<Complex64> = Vec::new();
    let mut stride_after = 1usize;
    for (axis, &len) in dims.iter().enumerate().rev() {
        let fft = plan(len, inverse);
        line.resize(len, Complex64::default());
        let stride = stride_after;
        let block = stride * len;
        let blocks = total / block;
        for b in 0..blocks {
            let base = b * block;
            for off in 0..stride {
                if stride == 1 {
                    fft.process(&mut data[base..base + len]);
                } else {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + off + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + off + i * stride] = *v;
                    }
                }
            }
        }
        stride_after *= len;
        let _ = axis;
    }
}
