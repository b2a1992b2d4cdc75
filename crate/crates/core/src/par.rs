//! Order-preserving instance-level parallelism.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Parallelism {
    Sequential,
    /// Rayon pool; `threads = None` uses the global pool. Runs sequentially
    /// when built without the `parallel` feature.
    Rayon {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threads: Option<usize>,
    },
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::Rayon { threads: None }
    }
}

/// Maps `f` over `items`, returning results in input order regardless of
/// completion order.
pub fn map<T, R, F>(items: &[T], par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match par {
        Parallelism::Sequential => items.iter().map(f).collect(),
        Parallelism::Rayon { threads } => rayon_map(items, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn rayon_map<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        None => items.par_iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn rayon_map<T, R, F>(items: &[T], _threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map(&xs, Parallelism::Sequential, |x| x * x);
        for par in [Parallelism::Rayon { threads: None }, Parallelism::Rayon { threads: Some(3) }] {
            assert_eq!(map(&xs, par, |x| x * x), seq);
        }
    }

    #[test]
    fn serde_shape() {
        let p: Parallelism = toml::from_str("kind = \"rayon\"\nthreads = 4").unwrap();
        assert_eq!(p, Parallelism::Rayon { threads: Some(4) });
        let p: Parallelism = toml::from_str("kind = \"sequential\"").unwrap();
        assert_eq!(p, Parallelism::Sequential);
    }
}
