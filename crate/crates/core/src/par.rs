//! Deterministic arg-best reduction, parallel when the `parallel` feature is on.
//!
//! The winner of a reduction is the best candidate under `cmp`, with ties
//! broken by the smaller index. That rule is associative and commutative, so
//! the result does not depend on how the range is partitioned across workers.

use std::cmp::Ordering;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn pick<T, C>(a: (usize, T), b: (usize, T), cmp: &C) -> (usize, T)
where
    C: Fn(&T, &T) -> Ordering,
{
    match cmp(&a.1, &b.1) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if a.0 <= b.0 {
                a
            } else {
                b
            }
        }
    }
}

/// Best `eval(i)` over `0..len` (skipping `None`), where `cmp(a, b) == Greater`
/// means `a` is better.
pub(crate) fn argbest<T, F, C>(len: usize, eval: F, cmp: C) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
    C: Fn(&T, &T) -> Ordering + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .with_min_len(1024)
            .filter_map(|i| eval(i).map(|v| (i, v)))
            .reduce_with(|a, b| pick(a, b, &cmp))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len)
            .filter_map(|i| eval(i).map(|v| (i, v)))
            .reduce(|a, b| pick(a, b, &cmp))
    }
}

/// `f(i)` for every `i` in `0..len`, in index order.
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_smallest_index() {
        let vals = [1.0, 3.0, 2.0, 3.0, 3.0];
        let best = argbest(vals.len(), |i| Some(vals[i]), |a: &f64, b: &f64| a.total_cmp(b));
        assert_eq!(best, Some((1, 3.0)));
    }

    #[test]
    fn skips_none() {
        let best = argbest(10, |i| (i % 3 == 2).then_some(i), |a: &usize, b: &usize| b.cmp(a));
        assert_eq!(best, Some((2, 2)));
        assert_eq!(argbest(0, |_| Some(0), |a: &i32, b: &i32| a.cmp(b)), None);
    }
}
