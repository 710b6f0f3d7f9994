//! One-dimensional complex FFT engine.
//!
//! Powers of two run through an iterative radix-2 decimation-in-time kernel.
//! Every other length goes through Bluestein's chirp-z algorithm on a
//! padded power-of-two convolution, so all n are O(n log n), including primes.
//! Plans (twiddle tables, chirp kernels) are cached per length and per thread.

use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

thread_local! {
    static PLAN_CACHE: RefCell<HashMap<usize, Rc<FftPlan>>> = RefCell::new(HashMap::new());
}

/// Unnormalized forward transform, in place.
pub fn fft_forward(buf: &mut [Complex64]) {
    plan_for(buf.len()).forward(buf);
}

/// Inverse transform with 1/n scaling, in place.
pub fn fft_inverse(buf: &mut [Complex64]) {
    plan_for(buf.len()).inverse(buf);
}

fn plan_for(n: usize) -> Rc<FftPlan> {
    let cached = PLAN_CACHE.with(|cache| cache.borrow().get(&n).map(Rc::clone));
    if let Some(plan) = cached {
        return plan;
    }
    // Built outside the borrow: Bluestein construction recurses into
    // plan_for for its padded inner transform.
    let plan = Rc::new(FftPlan::new(n));
    PLAN_CACHE.with(|cache| {
        cache.borrow_mut().insert(n, Rc::clone(&plan));
    });
    plan
}

struct FftPlan {
    n: usize,
    kind: PlanKind,
}

enum PlanKind {
    Trivial,
    Radix2 {
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        chirp: Vec<Complex64>,
        kernel_fft: Vec<Complex64>,
        inner: Rc<FftPlan>,
        padded: usize,
    },
}

impl FftPlan {
    fn new(n: usize) -> Self {
        assert!(n >= 1, "transform length must be at least 1");
        let kind = if n <= 2 {
            PlanKind::Trivial
        } else if n.is_power_of_two() {
            PlanKind::Radix2 {
                twiddles: forward_twiddles(n),
            }
        } else {
            let padded = (2 * n - 1).next_power_of_two();
            let chirp = chirp_table(n);
            // Circular kernel b[t] = conj(chirp[|t|]) laid out over the padded ring.
            let mut kernel = vec![Complex64::new(0.0, 0.0); padded];
            kernel[0] = chirp[0].conj();
            for t in 1..n {
                let value = chirp[t].conj();
                kernel[t] = value;
                kernel[padded - t] = value;
            }
            let inner = plan_for(padded);
            inner.forward(&mut kernel);
            PlanKind::Bluestein {
                chirp,
                kernel_fft: kernel,
                inner,
                padded,
            }
        };
        FftPlan { n, kind }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.kind {
            PlanKind::Trivial => {
                if self.n == 2 {
                    let (a, b) = (buf[0], buf[1]);
                    buf[0] = a + b;
                    buf[1] = a - b;
                }
            }
            PlanKind::Radix2 { twiddles } => radix2_forward(buf, twiddles),
            PlanKind::Bluestein {
                chirp,
                kernel_fft,
                inner,
                padded,
            } => {
                let n = self.n;
                let mut work = vec![Complex64::new(0.0, 0.0); *padded];
                for k in 0..n {
                    work[k] = buf[k] * chirp[k];
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_fft.iter()) {
                    *w *= *k;
                }
                inner.inverse(&mut work);
                for k in 0..n {
                    buf[k] = work[k] * chirp[k];
                }
            }
        }
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

fn forward_twiddles(n: usize) -> Vec<Complex64> {
    (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// chirp[k] = exp(-i pi k^2 / n), with k^2 reduced mod 2n to keep the
/// trig argument small (exp(-i pi m / n) has period 2n in m).
fn chirp_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let m = ((k as u64 * k as u64) % (2 * n as u64)) as f64;
            Complex64::from_polar(1.0, -PI * m / n as f64)
        })
        .collect()
}

fn radix2_forward(buf: &mut [Complex64], twiddles: &[Complex64]) {
    let n = buf.len();
    let shift = usize::BITS - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * step];
                let lo = buf[start + k];
                let hi = buf[start + half + k] * w;
                buf[start + k] = lo + hi;
                buf[start + half + k] = lo - hi;
            }
        }
        len <<= 1;
    }
}
