//! Minimal 3-D complex FFT built on rustfft, operating on the crate's
//! component-major storage. Plans are cached per thread.

use super::grid::Grid3;
use crate::par;
use crate::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                FftPlanner::new().plan_fft(len, dir)
            })
            .clone()
    })
}

/// In-place 3-D transform of a single component slab of shape
/// `(nx, ny, nz)` in `grid.index` layout. No normalization is applied.
pub fn fft3_inplace(data: &mut [Complex], grid: Grid3, forward: bool) {
    let (nx, ny, nz) = (grid.nx(), grid.ny(), grid.nz());
    debug_assert_eq!(data.len(), grid.len());

    // z axis: lines are contiguous.
    par::for_each_chunk_mut(data, nz, |_, line| {
        plan(nz, forward).process(line);
    });

    // y axis: each x-slab is an (ny, nz) matrix; gather strided lines.
    par::for_each_chunk_mut(data, ny * nz, |_, slab| {
        let fft = plan(ny, forward);
        let mut line = vec![Complex::ZERO; ny];
        for iz in 0..nz {
            for iy in 0..ny {
                line[iy] = slab[iy * nz + iz];
            }
            fft.process(&mut line);
            for iy in 0..ny {
                slab[iy * nz + iz] = line[iy];
            }
        }
    });

    // x axis: transpose x to the fast dimension, transform, scatter back.
    let plane = ny * nz;
    let mut scratch = vec![Complex::ZERO; grid.len()];
    {
        let src: &[Complex] = data;
        par::for_each_chunk_mut(&mut scratch, nx, |p, line| {
            let fft = plan(nx, forward);
            for ix in 0..nx {
                line[ix] = src[ix * plane + p];
            }
            fft.process(line);
        });
    }
    for (p, line) in scratch.chunks(nx).enumerate() {
        for ix in 0..nx {
            data[ix * plane + p] = line[ix];
        }
    }
}
