//! Value iteration for reachability.

use rayon::prelude::*;
use serde::Serialize;

use super::{prob0, prob1, SolverError, SolverOptions};
use crate::product::ProductGame;
use crate::scalar::Scalar;

/// Per-state reachability values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueVector<T> {
    pub values: Vec<T>,
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> ValueVector<T> {
    pub fn get(&self, s: usize) -> T {
        self.values[s]
    }
}

const CHUNK: usize = 1024;

/// Optimal value of `s` against the vector `v`.
#[inline]
fn backup<T: Scalar>(pg: &ProductGame<T>, maximizer: &[bool], v: &[T], s: usize) -> T {
    let choices = pg.choices(s);
    let mut best = choices[0].expected(v);
    for c in &choices[1..] {
        let x = c.expected(v);
        if (maximizer[s] && x > best) || (!maximizer[s] && x < best) {
            best = x;
        }
    }
    best
}

/// Iterates from 1 on target and almost-sure states, 0 elsewhere, with
/// value-0 and value-1 states pinned. Stops once no value moves by `epsilon`.
pub fn value_iteration<T: Scalar>(pg: &ProductGame<T>, opts: &SolverOptions) -> Result<ValueVector<T>, SolverError<T>> {
    if !(opts.epsilon > 0.0) {
        return Err(SolverError::Options("epsilon must be positive".into()));
    }
    if opts.max_iterations == 0 {
        return Err(SolverError::Options("max_iterations must be at least 1".into()));
    }
    let n = pg.num_states();
    let zero = prob0(pg, opts.objective);
    let one = prob1(pg, opts.objective);
    let maximizer: Vec<bool> = (0..n).map(|s| opts.objective.maximizes(pg.player(s))).collect();
    let mut v: Vec<T> = (0..n)
        .map(|s| if pg.target[s] || one[s] { T::one() } else { T::zero() })
        .collect();
    let free: Vec<bool> = (0..n)
        .map(|s| !pg.target[s] && !one[s] && !zero[s] && !pg.choices(s).is_empty())
        .collect();
    let eps = T::lit(opts.epsilon);

    if !free.iter().any(|&f| f) {
        return Ok(ValueVector {
            values: v,
            epsilon: opts.epsilon,
            iterations: 0,
            converged: true,
        });
    }

    let pool = match opts.threads {
        0 | 1 => None,
        k => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| SolverError::Options(e.to_string()))?,
        ),
    };

    let mut next = v.clone();
    let mut residual = T::zero();
    for iteration in 1..=opts.max_iterations {
        residual = if opts.gauss_seidel {
            let mut r = T::zero();
            for s in 0..n {
                if free[s] {
                    let x = backup(pg, &maximizer, &v, s);
                    debug_assert!(x >= v[s], "value decreased at state {s}");
                    r = r.max((x - v[s]).abs());
                    v[s] = x;
                }
            }
            r
        } else {
            let sweep = |(chunk, out): (usize, &mut [T])| {
                let mut r = T::zero();
                for (k, slot) in out.iter_mut().enumerate() {
                    let s = chunk * CHUNK + k;
                    if free[s] {
                        let x = backup(pg, &maximizer, &v, s);
                        debug_assert!(x >= v[s], "value decreased at state {s}");
                        r = r.max((x - v[s]).abs());
                        *slot = x;
                    }
                }
                r
            };
            let r = match (&pool, opts.threads) {
                (_, 1) => next.chunks_mut(CHUNK).enumerate().map(sweep).fold(T::zero(), T::max),
                (Some(pool), _) => pool.install(|| {
                    next.par_chunks_mut(CHUNK).enumerate().map(sweep).reduce(T::zero, T::max)
                }),
                (None, _) => next.par_chunks_mut(CHUNK).enumerate().map(sweep).reduce(T::zero, T::max),
            };
            std::mem::swap(&mut v, &mut next);
            r
        };
        debug_assert!(v.iter().all(|&x| x >= T::zero() && x <= T::one() + eps));
        if residual < eps {
            return Ok(ValueVector {
                values: v,
                epsilon: opts.epsilon,
                iterations: iteration,
                converged: true,
            });
        }
    }
    Err(SolverError::NonConvergence {
        values: ValueVector {
            values: v,
            epsilon: opts.epsilon,
            iterations: opts.max_iterations,
            converged: false,
        },
        residual: residual.as_f64(),
    })
}
