use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

struct Plans {
    planner: FftPlanner<f64>,
    cache: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

thread_local! {
    static PLANS: RefCell<Plans> = RefCell::new(Plans {
        planner: FftPlanner::new(),
        cache: HashMap::new(),
        scratch: Vec::new(),
        tmp: Vec::new(),
    });
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Unnormalized 2D transform in place on an `n×n` row-major buffer.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    PLANS.with(|p| {
        let p = &mut *p.borrow_mut();
        let fft = p
            .cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    p.planner.plan_fft_inverse(n)
                } else {
                    p.planner.plan_fft_forward(n)
                }
            })
            .clone();
        let need = fft.get_inplace_scratch_len();
        if p.scratch.len() < need {
            p.scratch.resize(need, Complex64::default());
        }
        if p.tmp.len() != n * n {
            p.tmp.resize(n * n, Complex64::default());
        }
        fft.process_with_scratch(data, &mut p.scratch[..need]);
        transpose(data, &mut p.tmp, n);
        fft.process_with_scratch(&mut p.tmp, &mut p.scratch[..need]);
        transpose(&p.tmp, data, n);
    });
}
