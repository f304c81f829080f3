//! Order-preserving parallel maps and cached thread pools.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

/// Maps `f` over `items`; results keep the item order whatever the
/// scheduling, so callers stay deterministic.
pub fn map_ordered<T, U, F>(parallel: bool, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    if parallel && items.len() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Like [`map_ordered`] with one scratch value per worker.
pub fn map_ordered_with<T, S, U, I, F>(parallel: bool, items: &[T], init: I, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> U + Sync + Send,
{
    if parallel && items.len() > 1 {
        items.par_iter().map_init(&init, |s, t| f(s, t)).collect()
    } else {
        let mut scratch = init();
        items.iter().map(|t| f(&mut scratch, t)).collect()
    }
}

fn pools() -> &'static Mutex<HashMap<usize, Arc<rayon::ThreadPool>>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    POOLS.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A pool with `threads` workers, built once per size. `None` when threads
/// cannot be spawned on this platform.
pub fn pool(threads: usize) -> Option<Arc<rayon::ThreadPool>> {
    let mut map = pools().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(p) = map.get(&threads) {
        return Some(p.clone());
    }
    let p = Arc::new(rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()?);
    map.insert(threads, p.clone());
    Some(p)
}

pub fn available_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_ordered(false, &items, |x| x * x);
        let par = pool(4).unwrap().install(|| map_ordered(true, &items, |x| x * x));
        assert_eq!(seq, par);
        let with = map_ordered_with(true, &items, Vec::<u64>::new, |s, x| {
            s.push(*x);
            x + 1
        });
        assert_eq!(with, items.iter().map(|x| x + 1).collect::<Vec<_>>());
    }

    #[test]
    fn pools_are_cached() {
        let a = pool(2).unwrap();
        let b = pool(2).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.current_num_threads(), 2);
    }
}
