//! Direct finite-trace semantics and negation normal form.

use super::{Formula, LtlfError, Trace};

/// Evaluates `f` at position `i` of `trace` by structural recursion.
pub fn eval_trace(f: &Formula, trace: &Trace, i: usize) -> Result<bool, LtlfError> {
    if i >= trace.len() {
        return Err(LtlfError::Index {
            index: i,
            len: trace.len(),
        });
    }
    Ok(eval_at(f, trace, i))
}

/// Whether the whole trace satisfies `f` (evaluation at position 0).
pub fn satisfies(f: &Formula, trace: &Trace) -> bool {
    eval_at(f, trace, 0)
}

fn eval_at(f: &Formula, trace: &Trace, i: usize) -> bool {
    let n = trace.len();
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => trace.steps()[i].contains(p),
        Formula::Not(a) => !eval_at(a, trace, i),
        Formula::And(a, b) => eval_at(a, trace, i) && eval_at(b, trace, i),
        Formula::Or(a, b) => eval_at(a, trace, i) || eval_at(b, trace, i),
        Formula::Implies(a, b) => !eval_at(a, trace, i) || eval_at(b, trace, i),
        Formula::Next(a) => n > i + 1 && eval_at(a, trace, i + 1),
        Formula::WeakNext(a) => n == i + 1 || eval_at(a, trace, i + 1),
        Formula::Until(a, b) => {
            (i..n).any(|j| eval_at(b, trace, j) && (i..j).all(|k| eval_at(a, trace, k)))
        }
        Formula::Release(a, b) => {
            (i..n).all(|j| eval_at(b, trace, j) || (i..j).any(|k| eval_at(a, trace, k)))
        }
        Formula::Eventually(a) => (i..n).any(|j| eval_at(a, trace, j)),
        Formula::Globally(a) => (i..n).all(|j| eval_at(a, trace, j)),
    }
}

/// Rewrites `f` so that negation only occurs directly above atoms and
/// `Eventually`, `Globally` and `Implies` are gone.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    match (f, negate) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Atom(_), false) => f.clone(),
        (Formula::Atom(_), true) => Formula::not(f.clone()),
        (Formula::Not(a), _) => nnf(a, !negate),
        (Formula::And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Formula::Implies(a, b), false) => Formula::or(nnf(a, true), nnf(b, false)),
        (Formula::Implies(a, b), true) => Formula::and(nnf(a, false), nnf(b, true)),
        (Formula::Next(a), false) => Formula::next(nnf(a, false)),
        (Formula::Next(a), true) => Formula::weak_next(nnf(a, true)),
        (Formula::WeakNext(a), false) => Formula::weak_next(nnf(a, false)),
        (Formula::WeakNext(a), true) => Formula::next(nnf(a, true)),
        (Formula::Until(a, b), false) => Formula::until(nnf(a, false), nnf(b, false)),
        (Formula::Until(a, b), true) => Formula::release(nnf(a, true), nnf(b, true)),
        (Formula::Release(a, b), false) => Formula::release(nnf(a, false), nnf(b, false)),
        (Formula::Release(a, b), true) => Formula::until(nnf(a, true), nnf(b, true)),
        (Formula::Eventually(a), false) => Formula::until(Formula::True, nnf(a, false)),
        (Formula::Eventually(a), true) => Formula::release(Formula::False, nnf(a, true)),
        (Formula::Globally(a), false) => Formula::release(Formula::False, nnf(a, false)),
        (Formula::Globally(a), true) => Formula::until(Formula::True, nnf(a, true)),
    }
}

/// True when `f` is in negation normal form as produced by [`to_nnf`].
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Not(a) => matches!(**a, Formula::Atom(_)),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
            is_nnf(a) && is_nnf(b)
        }
        Formula::Next(a) | Formula::WeakNext(a) => is_nnf(a),
        Formula::Implies(..) | Formula::Eventually(_) | Formula::Globally(_) => false,
    }
}
